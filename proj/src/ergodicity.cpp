#include "semiswitch/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semiswitch/dynamics.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/integrator.hpp"
#include "semiswitch/parallel.hpp"
#include "semiswitch/stats.hpp"
#include "semiswitch/switching.hpp"

namespace semiswitch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDenominatorFloor = 1e-12;

double integrate_segment(const std::function<double(double)>& g, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 12, 1e-13);
}

// State (x, 0, i) flowed backward by s.
HybridState origin_of(const SwitchedSystem& sys, const HybridState& z) {
  return HybridState{flow(sys, z.i, -z.s, z.x), 0.0, z.i};
}

Rhs augmented(const SwitchedSystem& sys, int i, double direction) {
  const auto& field = sys.fields[i];
  const auto& rate = sys.rates[i];
  const int d = sys.dim;
  return [&field, &rate, d, direction](const Vec& y) {
    Vec o(d + 1);
    Vec p = y.head(d);
    o.head(d) = direction * field.rhs(p);
    o[d] = rate(p);
    return o;
  };
}

FlowConfig tight_config(const SwitchedSystem& sys) {
  FlowConfig cfg = sys.flow_config;
  cfg.kind = FlowConfig::Kind::Adaptive;
  cfg.abs_tol = std::min(cfg.abs_tol, 1e-10);
  cfg.rel_tol = std::min(cfg.rel_tol, 1e-10);
  return cfg;
}

}  // namespace

LyapunovParams LyapunovParams::from_system(const SwitchedSystem& sys, double delta) {
  LyapunovParams p;
  p.delta = delta;
  p.beta = kInf;
  p.C = 1.0;
  for (const auto& law : sys.laws) {
    ExpDecay d = law.exp_decay();
    p.beta = std::min(p.beta, d.beta);
    p.C = std::max(p.C, d.C);
  }
  p.lambda_min = sys.lambda_min();
  return p;
}

void LyapunovParams::validate(const SwitchedSystem& sys) const {
  if (!(delta > 0.0 && delta < 1.0)) throw NoExpDecay("delta must lie in (0,1)");
  if (!(beta > 0.0) || !std::isfinite(beta) || !(C > 0.0)) throw NoExpDecay("decay constants must be positive");
  if (!(gamma() > 0.0)) throw NoExpDecay("gamma must be positive");
  const double horizon = 30.0 / beta;
  for (std::size_t i = 0; i < sys.laws.size(); ++i) {
    for (int k = 0; k <= 400; ++k) {
      double t = horizon * k / 400.0;
      if (sys.laws[i].survival(t) > C * std::exp(-beta * t) * (1.0 + 1e-12) + 1e-300)
        throw NoExpDecay("law " + std::to_string(i) + " exceeds C exp(-beta t) at t = " + std::to_string(t));
    }
  }
}

double lyapunov_f(const SwitchedSystem& sys, const HybridState& z, const LyapunovParams& p) {
  if (z.s <= 0.0) return 0.0;
  const auto& law = sys.laws.at(z.i);
  const auto& rate = sys.rates.at(z.i);
  const double gamma = p.gamma();
  const double s = z.s;
  double g0 = law.survival(cumulative_rate(sys, z, 0.0));
  if (g0 < kDenominatorFloor) return kInf;

  // f = gamma * int_0^s exp(-gamma (s-u)) G_y(u) / G_y(s) du with y the origin of z.
  std::function<double(double)> surv;
  std::vector<double> cuts{0.0};
  if (rate.constant) {
    double lam = *rate.constant;
    surv = [&law, lam](double u) { return law.survival(lam * u); };
    for (double b : law.breakpoints())
      if (b / lam > 0.0 && b / lam < s) cuts.push_back(b / lam);
  } else {
    surv = [&](double u) { return law.survival(cumulative_rate(sys, z, u - s)); };
    HybridState y = origin_of(sys, z);
    double total = cumulative_rate(sys, z, 0.0);
    for (double b : law.breakpoints())
      if (b > 0.0 && b < total) cuts.push_back(time_to_cumulative(sys, y.x, z.i, b).time);
  }
  cuts.push_back(s);
  std::sort(cuts.begin(), cuts.end());
  auto integrand = [&](double u) { return std::exp(-gamma * (s - u)) * surv(u); };
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) integral += integrate_segment(integrand, cuts[k], cuts[k + 1]);
  return gamma * integral / g0;
}

Estimate lyapunov_f_mc(const SwitchedSystem& sys, const HybridState& z, const LyapunovParams& p, std::size_t n,
                       ReplicaStream& rng) {
  if (z.s <= 0.0) return {0.0, 0.0};
  if (n == 0) throw InvalidArgument("Monte-Carlo sample size must be positive");
  const auto& law = sys.laws.at(z.i);
  double g0 = law.survival(cumulative_rate(sys, z, 0.0));
  if (g0 < kDenominatorFloor) return {kInf, 0.0};
  HybridState y = origin_of(sys, z);
  const double gamma = p.gamma();
  std::vector<double> vals(n);
  for (auto& v : vals) {
    double s1 = sample_holding(sys, y, rng);
    v = s1 <= z.s ? std::exp(gamma * s1) : 0.0;
  }
  MeanSe m = mean_and_se(vals);
  double scale = std::exp(-gamma * z.s) / g0;
  return {scale * (m.mean - 1.0) + 1.0, scale * m.std_error};
}

DriftRecord drift_check(const SwitchedSystem& sys, const HybridState& z, double t, const LyapunovParams& p,
                        std::size_t replicas, std::uint64_t seed, int threads) {
  if (t < 0.0) throw InvalidArgument("drift time must be nonnegative");
  DriftRecord r;
  r.z = z;
  r.t = t;
  r.f0 = lyapunov_f(sys, z, p);
  r.bound = std::exp(-p.gamma() * t) * r.f0 + 1.0;
  if (t == 0.0 || replicas == 0) {
    r.estimate = r.f0;
    r.pass = r.estimate <= r.bound;
    return r;
  }
  std::vector<double> vals(replicas);
  parallel_for(replicas, threads, [&](std::size_t k) {
    ReplicaStream rng = ReplicaStream::derive(seed, k);
    TrajectoryRecord tr = simulate(sys, z, t, rng);
    vals[k] = lyapunov_f(sys, state_at(sys, tr, t), p);
  });
  MeanSe m = mean_and_se(vals);
  r.estimate = m.mean;
  r.std_error = m.std_error;
  r.pass = std::isfinite(r.estimate) && r.estimate <= r.bound + 3.0 * r.std_error;
  return r;
}

GridFunction1D GridFunction1D::tabulate(std::vector<double> x, std::vector<double> tau, int states,
                                        const std::function<double(double, double, int)>& f) {
  GridFunction1D g;
  g.x = std::move(x);
  g.tau = std::move(tau);
  g.states = states;
  g.validate();
  g.values.assign(static_cast<std::size_t>(states) * g.x.size() * g.tau.size(), 0.0);
  for (int i = 0; i < states; ++i)
    for (std::size_t ix = 0; ix < g.x.size(); ++ix)
      for (std::size_t it = 0; it < g.tau.size(); ++it) g.at(i, ix, it) = f(g.x[ix], g.tau[it], i);
  return g;
}

void GridFunction1D::validate() const {
  if (x.empty() || tau.empty() || states < 1) throw InvalidArgument("grid function needs nonempty grids");
  for (std::size_t k = 1; k < x.size(); ++k)
    if (!(x[k] > x[k - 1])) throw InvalidArgument("x grid must be strictly increasing");
  for (std::size_t k = 1; k < tau.size(); ++k)
    if (!(tau[k] > tau[k - 1])) throw InvalidArgument("tau grid must be strictly increasing");
  if (!values.empty() && values.size() != static_cast<std::size_t>(states) * x.size() * tau.size())
    throw InvalidArgument("grid function value count does not match its grids");
}

namespace {

struct Bracket {
  std::size_t lo = 0;
  double w = 0.0;  // weight of lo + 1
};

Bracket locate(const std::vector<double>& g, double v) {
  if (g.size() == 1 || v <= g.front()) return {0, 0.0};
  if (v >= g.back()) return {g.size() - 2, 1.0};
  std::size_t hi = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), v) - g.begin());
  std::size_t lo = hi - 1;
  return {lo, (v - g[lo]) / (g[hi] - g[lo])};
}

}  // namespace

double GridFunction1D::interpolate(double xv, double tv, int i) const {
  Bracket bx = locate(x, xv);
  Bracket bt = locate(tau, tv);
  auto val = [&](std::size_t ix, std::size_t it) {
    return at(i, std::min(ix, x.size() - 1), std::min(it, tau.size() - 1));
  };
  double a = (1.0 - bt.w) * val(bx.lo, bt.lo) + bt.w * val(bx.lo, bt.lo + 1);
  double b = (1.0 - bt.w) * val(bx.lo + 1, bt.lo) + bt.w * val(bx.lo + 1, bt.lo + 1);
  return (1.0 - bx.w) * a + bx.w * b;
}

SemigroupResult semigroup_iterate(const SwitchedSystem& sys, const GridFunction1D& f, double t, int iterations,
                                  const SemigroupOptions& opt) {
  if (sys.dim != 1) throw InvalidArgument("semigroup_iterate needs a one-dimensional system");
  f.validate();
  if (f.states != sys.states()) throw InvalidArgument("grid function state count differs from the system");
  for (std::size_t i = 0; i < sys.laws.size(); ++i)
    if (sys.laws[i].has_atoms()) throw DiscontinuousLaw("law " + std::to_string(i) + " has atoms");
  if (t < 0.0 || iterations < 0) throw InvalidArgument("t and the iteration count must be nonnegative");
  if (opt.time_points < 2) throw InvalidArgument("need at least two time points");

  SemigroupResult res;
  res.value = f;
  const double fnorm = std::transform_reduce(f.values.begin(), f.values.end(), 0.0,
                                             [](double a, double b) { return std::max(a, b); },
                                             [](double v) { return std::abs(v); });
  {
    ReplicaStream rng(opt.seed);
    std::vector<std::size_t> hits(iterations + 1, 0);
    for (std::size_t d = 0; d < opt.bound_draws; ++d) {
      double acc = 0.0;
      for (int k = 1; k <= iterations; ++k) {
        if (acc <= t) ++hits[k];
        acc += dominating_quantile(sys, rng.uniform_open_closed());
      }
    }
    res.tail_bounds.assign(iterations + 1, 0.0);
    for (int k = 1; k <= iterations; ++k)
      res.tail_bounds[k] = 2.0 * fnorm * static_cast<double>(hits[k]) / static_cast<double>(opt.bound_draws);
  }
  if (iterations == 0 || t == 0.0) return res;

  const int N = sys.states();
  const std::size_t nx = f.x.size();
  const std::size_t nt = f.tau.size();
  const std::size_t nr = opt.time_points;
  const double h = t / static_cast<double>(nr - 1);
  std::vector<double> half_times(2 * nr - 1);
  for (std::size_t k = 0; k < half_times.size(); ++k) half_times[k] = 0.5 * h * static_cast<double>(k);
  half_times.back() = t;
  FlowConfig cfg = tight_config(sys);

  // Per (state, start point): cumulative rate at r_n, positions at r_n and at midpoints.
  struct Profile {
    std::vector<double> rate;      // nr
    std::vector<double> pos_r;     // nr
    std::vector<Bracket> mid;      // nr - 1
    std::vector<double> q;         // (nr - 1) * N
  };
  std::vector<Profile> prof(static_cast<std::size_t>(N) * nx);
  parallel_for(prof.size(), opt.threads, [&](std::size_t k) {
    int j = static_cast<int>(k / nx);
    std::size_t ix = k % nx;
    Vec y0(2);
    y0 << f.x[ix], 0.0;
    std::vector<Vec> path = integrate_at(augmented(sys, j, 1.0), y0, half_times, cfg);
    Profile& p = prof[k];
    p.rate.resize(nr);
    p.pos_r.resize(nr);
    p.mid.resize(nr - 1);
    p.q.resize((nr - 1) * N);
    for (std::size_t n = 0; n < nr; ++n) {
      p.rate[n] = path[2 * n][1];
      p.pos_r[n] = path[2 * n][0];
    }
    for (std::size_t m = 0; m + 1 < nr; ++m) {
      double xm = path[2 * m + 1][0];
      p.mid[m] = locate(f.x, xm);
      Mat q = sys.jump(Vec::Constant(1, xm));
      for (int l = 0; l < N; ++l) p.q[m * N + l] = q(j, l);
    }
  });

  // W(j, ix, n): iterate at (x_ix, 0, j) with remaining time r_n.
  auto widx = [&](int j, std::size_t ix, std::size_t n) { return (j * nx + ix) * nr + n; };
  std::vector<double> W(static_cast<std::size_t>(N) * nx * nr), Wn(W.size());
  for (int j = 0; j < N; ++j)
    for (std::size_t ix = 0; ix < nx; ++ix)
      for (std::size_t n = 0; n < nr; ++n) W[widx(j, ix, n)] = f.interpolate(f.x[ix], 0.0, j);

  // Jump contribution from delays u_m..u_{m+1} with remaining time r_n - u, weighted by survival mass.
  auto jump_term = [&](const Profile& p, const std::vector<double>& mass, std::size_t n_end,
                       const std::vector<double>& Wp) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n_end; ++m) {
      if (mass[m] == 0.0) continue;
      const Bracket& b = p.mid[m];
      std::size_t hi = std::min(b.lo + 1, nx - 1);
      std::size_t ra = n_end - m - 1, rb = n_end - m;
      double inner = 0.0;
      for (int l = 0; l < N; ++l) {
        double ql = p.q[m * N + l];
        if (ql == 0.0) continue;
        double wa = (1.0 - b.w) * Wp[widx(l, b.lo, ra)] + b.w * Wp[widx(l, hi, ra)];
        double wb = (1.0 - b.w) * Wp[widx(l, b.lo, rb)] + b.w * Wp[widx(l, hi, rb)];
        inner += ql * 0.5 * (wa + wb);
      }
      acc += mass[m] * inner;
    }
    return acc;
  };

  for (int k = 1; k < iterations; ++k) {
    parallel_for(static_cast<std::size_t>(N) * nx, opt.threads, [&](std::size_t kk) {
      int j = static_cast<int>(kk / nx);
      std::size_t ix = kk % nx;
      const Profile& p = prof[kk];
      const auto& law = sys.laws[j];
      std::vector<double> G(nr), mass(nr - 1);
      for (std::size_t n = 0; n < nr; ++n) G[n] = law.survival(p.rate[n]);
      for (std::size_t m = 0; m + 1 < nr; ++m) mass[m] = G[m] - G[m + 1];
      for (std::size_t n = 0; n < nr; ++n)
        Wn[widx(j, ix, n)] = f.interpolate(p.pos_r[n], h * static_cast<double>(n), j) * G[n] + jump_term(p, mass, n, W);
    });
    double inc = 0.0;
    for (std::size_t q = 0; q < W.size(); ++q) inc = std::max(inc, std::abs(Wn[q] - W[q]));
    res.increments.push_back(inc);
    std::swap(W, Wn);
  }

  // Final sweep on the output grid from states (x, tau, i).
  GridFunction1D out = f;
  parallel_for(static_cast<std::size_t>(N) * nx, opt.threads, [&](std::size_t kk) {
    int i = static_cast<int>(kk / nx);
    std::size_t ix = kk % nx;
    const Profile& p = prof[kk];
    const auto& law = sys.laws[i];
    const auto& rate = sys.rates[i];
    std::vector<double> back(nt, kNaN);
    double horizon = sys.fields[i].horizon(Vec::Constant(1, f.x[ix]));
    if (rate.constant) {
      for (std::size_t it = 0; it < nt; ++it)
        if (f.tau[it] <= horizon) back[it] = *rate.constant * f.tau[it];
    } else {
      Vec y0(2);
      y0 << f.x[ix], 0.0;
      std::vector<double> times;
      for (double s : f.tau)
        if (s <= horizon) times.push_back(s);
      try {
        std::vector<Vec> path = integrate_at(augmented(sys, i, -1.0), y0, times, cfg);
        for (std::size_t it = 0; it < path.size(); ++it) back[it] = path[it][1];
      } catch (const Error&) {
      }
    }
    std::vector<double> G(nr), mass(nr - 1);
    for (std::size_t it = 0; it < nt; ++it) {
      double c0 = back[it];
      double g0 = std::isnan(c0) ? 0.0 : law.survival(c0);
      if (!(g0 > 0.0)) {
        out.at(i, ix, it) = kNaN;
        continue;
      }
      for (std::size_t n = 0; n < nr; ++n) G[n] = law.survival(c0 + p.rate[n]) / g0;
      for (std::size_t m = 0; m + 1 < nr; ++m) mass[m] = G[m] - G[m + 1];
      out.at(i, ix, it) =
          f.interpolate(p.pos_r[nr - 1], f.tau[it] + t, i) * G[nr - 1] + jump_term(p, mass, nr - 1, W);
    }
  });
  res.value = std::move(out);
  return res;
}

HybridState resolvent_sample(const SwitchedSystem& sys, const HybridState& z, ReplicaStream& rng) {
  double T = -std::log(rng.uniform_open_closed());
  TrajectoryRecord tr = simulate(sys, z, T, rng);
  return state_at(sys, tr, T);
}

RegularityProbe regularity_probe(const HoldingLaw& law, double t, double radius, std::size_t points) {
  if (!law.has_density()) throw NoDensity("law has no absolutely continuous part");
  if (points < 2 || radius < 0.0) throw InvalidArgument("probe needs two points and a nonnegative radius");
  double lo = std::max(0.0, t - radius);
  double hi = t + radius;
  double m = kInf;
  for (std::size_t k = 0; k < points; ++k) {
    double v = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    m = std::min(m, law.density(v).value_or(0.0));
  }
  return {m > 0.0, std::max(m, 0.0)};
}

SubmersionCertificate submersion_certificate(const SwitchedSystem& sys, const HybridState& z,
                                             const ControlSequence& cs, double T, double radius) {
  SubmersionCertificate c;
  const std::size_t legs = cs.size();
  if (legs < 3 || cs.indices.size() != cs.times.size()) {
    c.diagnostics.push_back("sequence must have m+2 legs with m >= 1");
    return c;
  }
  const std::size_t m = legs - 2;
  double head = 0.0;
  for (std::size_t k = 0; k <= m; ++k) head += cs.times[k];
  if (std::abs(head - T) > 1e-9 * std::max(1.0, T)) c.diagnostics.push_back("first m+1 times do not sum to T");

  c.admissibility = is_admissible(sys, z, cs);
  c.admissible = c.admissibility.verdict;
  if (!c.admissible)
    c.diagnostics.push_back(std::string("admissibility: ") + to_string(c.admissibility.failing_condition));

  try {
    std::vector<int> idx(cs.indices.begin(), cs.indices.begin() + static_cast<long>(m + 1));
    std::vector<double> times(cs.times.begin(), cs.times.begin() + static_cast<long>(m));
    SubmersionJacobian sj = submersion_jacobian(sys.fields, z.x, idx, times, T, sys.flow_config);
    c.rank = sj.rank;
    c.full_rank = sj.rank == sys.dim;
    if (!c.full_rank) c.diagnostics.push_back("submersion rank " + std::to_string(sj.rank) + " below dimension");
  } catch (const Error& e) {
    c.diagnostics.push_back(std::string("rank: ") + e.kind() + ": " + e.what());
  }

  try {
    CompositeFlowResult path = composite_flow(sys, cs, z.x);
    bool ok = true;
    auto probe = [&](const HybridState& from, double s) {
      double lo = std::max(0.0, s - radius), hi = s + radius;
      double mn = kInf;
      for (int k = 0; k <= 100; ++k) mn = std::min(mn, jump_density(sys, from, lo + (hi - lo) * k / 100.0));
      c.density_bounds.push_back(std::max(mn, 0.0));
      return mn > 0.0;
    };
    ok = probe(z, cs.times[0]) && ok;
    for (std::size_t k = 2; k <= legs; ++k)
      ok = probe(HybridState{path.points[k - 1], 0.0, cs.indices[k - 1]}, cs.times[k - 1]) && ok;
    c.regular = ok;
    if (!ok) c.diagnostics.push_back("some time is not a regular point of its conditional law");
  } catch (const Error& e) {
    c.diagnostics.push_back(std::string("regularity: ") + e.kind() + ": " + e.what());
  }
  return c;
}

}  // namespace semiswitch
