#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "semiswitch/accessibility.hpp"
#include "semiswitch/dynamics.hpp"
#include "semiswitch/ergodicity.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/estimators.hpp"
#include "semiswitch/process.hpp"
#include "semiswitch/scenarios.hpp"
#include "semiswitch/stats.hpp"
#include "semiswitch/switching.hpp"

using namespace semiswitch;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

HybridState at(double x, double s, int i) { return HybridState{Vec::Constant(1, x), s, i}; }

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome inverse_sampling() {
  Outcome o;
  auto t0 = Clock::now();
  const std::size_t n = 100000;
  struct Case {
    std::string name;
    HoldingLaw law;
    std::function<double(double)> cdf, cdf_left;
  };
  std::vector<Case> cases = {
      {"exponential", HoldingLaw::exponential(1.0), [](double t) { return 1.0 - std::exp(-t); }, nullptr},
      {"uniform", HoldingLaw::uniform(0.0, 2.0), [](double t) { return std::clamp(t / 2.0, 0.0, 1.0); }, nullptr},
      {"dirac-mixture", HoldingLaw::atoms({{1.0, 0.5}, {2.0, 0.5}}),
       [](double t) { return t < 1.0 ? 0.0 : (t < 2.0 ? 0.5 : 1.0); },
       [](double t) { return t <= 1.0 ? 0.0 : (t <= 2.0 ? 0.5 : 1.0); }},
  };
  for (auto& c : cases) {
    SwitchedSystem sys = relaxation_pair(c.law, c.law);
    ReplicaStream rng = ReplicaStream::derive(11, 0);
    std::vector<double> draws(n);
    for (auto& d : draws) d = sample_holding(sys, at(0.5, 0.0, 0), rng);
    KsResult ks = ks_one_sample(draws, c.cdf, c.cdf_left);
    o.require(ks.p_value > 1e-3, c.name + " p=" + fmt("%.3g", ks.p_value));
    o.detail += (o.detail.empty() ? "" : ", ") + c.name + " p=" + fmt("%.3f", ks.p_value);
  }
  double secs = seconds_since(t0);
  o.require(secs < 5.0, "runtime " + fmt("%.2f s", secs));
  return o;
}

Outcome conditional_law() {
  Outcome o;
  Scenario sc = make_builtin("km-example");
  const auto& sys = sc.system;
  const std::size_t n = 100000;
  const double s = 0.5;
  HybridState z = at(0.5, s, 0);
  HybridState y{flow(sys, 0, -s, z.x), 0.0, 0};
  ReplicaStream ra = ReplicaStream::derive(21, 0), rb = ReplicaStream::derive(21, 1);
  std::vector<double> a(n), b;
  for (auto& v : a) v = sample_holding(sys, z, ra);
  while (b.size() < n) {
    double v = sample_holding(sys, y, rb);
    if (v > s) b.push_back(v - s);
  }
  KsResult ks = ks_two_sample(a, b);
  o.require(ks.p_value > 1e-3, "p too small");
  o.detail = "two-sample p=" + fmt("%.3f", ks.p_value);
  return o;
}

Outcome jump_counts() {
  Outcome o;
  SwitchedSystem sys = exponential_flip(1.0);
  auto reps = simulate_replicas(sys, at(0.5, 0.0, 0), 10.0, 31, 10000, 1);
  std::vector<double> counts;
  for (const auto& r : reps) counts.push_back(static_cast<double>(jump_count(r, 10.0)));
  MeanSe m = mean_and_se(counts);
  o.require(m.mean >= 9.7 && m.mean <= 10.3, "Poisson mean " + fmt("%.3f", m.mean));
  o.detail = "mean N_10=" + fmt("%.3f", m.mean);
  for (const auto& info : builtin_catalog()) {
    Scenario sc = make_builtin(info.name);
    const double t = 10.0;
    auto rs = simulate_replicas(sc.system, sc.start, t, 32, 1000, 1);
    std::vector<double> c;
    for (const auto& r : rs) c.push_back(static_cast<double>(jump_count(r, t)));
    MeanSe sim = mean_and_se(c);
    ReplicaStream rng = ReplicaStream::derive(33, 0);
    Estimate bound = expected_jump_bound(sc.system, t, 400, 20000, rng);
    double se = std::hypot(sim.std_error, bound.std_error);
    o.require(sim.mean <= bound.value + 3.0 * se,
              info.name + " mean " + fmt("%.3f", sim.mean) + " above bound " + fmt("%.3f", bound.value));
  }
  return o;
}

Outcome km_membership() {
  Outcome o;
  Scenario sc = make_builtin("km-example");
  long disagreements = 0, checked = 0;
  for (int ix = 0; ix < 50; ++ix)
    for (int is = 0; is < 100; ++is)
      for (int i = 0; i < 2; ++i) {
        double x = -0.2 + 1.4 * ix / 49.0;
        double s = 3.0 * is / 99.0;
        bool inside = x >= 0.0 && x <= 1.0;
        double edge = inside && std::abs(i - x) > 0.0 ? -std::log(std::abs(i - x)) : INFINITY;
        bool closed = inside && s <= edge && s < 2.0;
        double band = std::min({std::abs(s - edge), std::abs(x), std::abs(x - 1.0), std::abs(s - 2.0)});
        if (band <= 1e-9) continue;
        ++checked;
        if (in_K_M(sc.system, at(x, s, i)) != closed) ++disagreements;
      }
  o.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  o.detail = std::to_string(checked) + " grid points, " + std::to_string(disagreements) + " disagreements";
  return o;
}

Outcome lyapunov_closed_form() {
  Outcome o;
  SwitchedSystem sys = exponential_flip(1.0);
  LyapunovParams p = LyapunovParams::from_system(sys, 0.5);
  p.validate(sys);
  double worst = 0.0;
  for (double s : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0}) {
    double f = lyapunov_f(sys, at(0.3, s, 1), p);
    worst = std::max(worst, std::abs(f - (std::exp(s / 2.0) - 1.0)));
  }
  o.require(worst <= 1e-9, "quadrature error " + fmt("%.2e", worst));
  ReplicaStream rng = ReplicaStream::derive(51, 0);
  Estimate mc = lyapunov_f_mc(sys, at(0.3, 2.0, 0), p, 1000000, rng);
  double exact = std::exp(1.0) - 1.0;
  o.require(std::abs(mc.value - exact) <= 3.0 * mc.std_error, "Monte-Carlo off by " + fmt("%.2e", mc.value - exact));
  int failed = 0;
  for (double s : {0.0, 1.0, 2.0})
    for (double t : {0.5, 1.0, 2.0}) {
      DriftRecord d = drift_check(sys, at(0.3, s, 0), t, p, 4000, 52);
      if (!d.pass) ++failed;
    }
  o.require(failed == 0, std::to_string(failed) + " drift checks failed");
  o.detail = "max quadrature error " + fmt("%.1e", worst) + ", MC z-score " +
             fmt("%.2f", (mc.value - exact) / mc.std_error) + ", drift failures " + std::to_string(failed);
  return o;
}

Outcome bracket_ranks() {
  Outcome o;
  Scenario na = make_builtin("non-analytic");
  int r1 = bracket_rank(na.system.fields, Vec::Constant(1, -0.5), BracketMode::Strong).rank;
  o.require(r1 == 1, "non-analytic strong rank " + std::to_string(r1));
  Scenario ni = make_builtin("non-irreducible");
  int bad = 0;
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) {
      Vec x(2);
      x << a / 10.0, b / 10.0;
      if (bracket_rank(ni.system.fields, x, BracketMode::Strong).rank != 2) ++bad;
    }
  o.require(bad == 0, std::to_string(bad) + " square points below rank 2");
  FieldList same = {relaxation_field("a", Vec::Constant(1, 0.0)), relaxation_field("b", Vec::Constant(1, 0.0))};
  int r0 = bracket_rank(same, Vec::Constant(1, 0.3), BracketMode::Strong).rank;
  o.require(r0 == 0, "identical fields rank " + std::to_string(r0));
  o.detail = "ranks " + std::to_string(r1) + ", 2 on " + std::to_string(121 - bad) + "/121, " + std::to_string(r0);
  return o;
}

Outcome fixed_point() {
  Outcome o;
  SwitchedSystem sys = exponential_flip(1.0);
  const double t = std::log(2.0);
  FixedPointResult r = fixed_point_1d(sys.fields[0], sys.fields[1], t, t, 0.9, 1e-14);
  o.require(std::abs(r.x - 1.0 / 3.0) <= 1e-10, "x* = " + fmt("%.12f", r.x));
  double cap = std::exp(-2.0 * t) + 1e-6;
  o.require(r.contraction <= cap, "contraction " + fmt("%.6f", r.contraction));
  o.detail = "x*=" + fmt("%.12f", r.x) + ", contraction " + fmt("%.6f", r.contraction) + " <= " + fmt("%.6f", cap);
  return o;
}

Outcome algorithm_one() {
  Outcome o;
  auto t0 = Clock::now();
  const double eps = 1e-2;
  SwitchedSystem plane = constant_drift_plane();
  SwitchedSystem line = exponential_flip(1.0);
  ReplicaStream rng = ReplicaStream::derive(81, 0);
  int inadmissible = 0, far = 0, slow = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const SwitchedSystem& sys = k % 2 == 0 ? plane : line;
    int legs = 1 + static_cast<int>(rng.uniform() * 3.0);
    ControlSequence cs;
    for (int l = 0; l < legs; ++l) {
      int idx;
      do idx = static_cast<int>(rng.uniform() * sys.states());
      while (l > 0 && idx == cs.indices.back());
      cs.indices.push_back(idx);
      cs.times.push_back(sys.dim == 2 ? 0.1 + 0.9 * rng.uniform() : 0.05 + 0.15 * rng.uniform());
    }
    Vec x = sys.dim == 2 ? Vec(Vec::Random(2)) : Vec(Vec::Constant(1, rng.uniform()));
    Algorithm1Options opt;
    opt.seed = 100 + k;
    Algorithm1Result r = algorithm1(sys, x, cs, eps, opt);
    if (!is_admissible(sys, HybridState{x, 0.0, cs.indices.front()}, r.sequence).verdict) ++inadmissible;
    HybridState end = reach_endpoint(sys, HybridState{x, 0.0, cs.indices.front()}, r.sequence);
    double err = (end.x - r.target).norm();
    worst = std::max(worst, err);
    if (err > eps || r.sequence.indices.back() != cs.indices.back()) ++far;
    for (std::size_t l = 0; l < r.iterations.size(); ++l)
      if (r.iterations[l] > 10 * r.step_bounds[l]) ++slow;
  }
  double secs = seconds_since(t0);
  o.require(inadmissible == 0, std::to_string(inadmissible) + " inadmissible");
  o.require(far == 0, std::to_string(far) + " beyond epsilon");
  o.require(slow == 0, std::to_string(slow) + " legs over the step bound");
  o.require(secs < 30.0, "runtime " + fmt("%.1f s", secs));
  o.detail = "worst error " + fmt("%.2e", worst) + ", runtime " + fmt("%.1f s", secs);
  return o;
}

Outcome counterexamples() {
  Outcome o;
  SimulationOptions dense;
  dense.dense_dt = 0.1;
  {
    Scenario sc = make_builtin("non-irreducible");
    long bad = 0;
    for (std::size_t r = 0; r < 1000; ++r) {
      ReplicaStream rng = ReplicaStream::derive(91, r);
      Vec x(2);
      x << rng.uniform(), rng.uniform();
      int i0 = rng.uniform() < 0.5 ? 0 : 1;
      TrajectoryRecord tr = simulate(sc.system, HybridState{x, 0.0, i0}, 100.0, rng, dense);
      for (const auto& m : tr.marks)
        if (m.z.i > 1 || std::abs(m.z.x[1] - x[1]) > 1e-12) ++bad;
      for (const auto& d : tr.dense)
        if (d.i > 1 || std::abs(d.x[1] - x[1]) > 1e-12) ++bad;
    }
    o.require(bad == 0, "non-irreducible: " + std::to_string(bad) + " violations");
  }
  {
    Scenario sc = make_builtin("dwell-radial");
    long bad = 0;
    double worst = INFINITY;
    for (std::size_t r = 0; r < 1000; ++r) {
      ReplicaStream rng = ReplicaStream::derive(92, r);
      Vec x(2);
      x << 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0;
      int i0 = rng.uniform() < 0.5 ? 0 : 1;
      TrajectoryRecord tr = simulate(sc.system, HybridState{x, 0.0, i0}, 100.0, rng, dense);
      double floor = std::exp(-3.0) * x.norm();
      auto check = [&](const Vec& p) {
        worst = std::min(worst, p.norm() / x.norm());
        if (p.norm() < floor) ++bad;
      };
      for (const auto& m : tr.marks) check(m.z.x);
      for (const auto& d : tr.dense) check(d.x);
    }
    o.require(bad == 0, "dwell-radial: " + std::to_string(bad) + " violations");
    o.detail += "min radial ratio " + fmt("%.4f", worst) + " vs " + fmt("%.4f", std::exp(-3.0));
  }
  {
    Scenario sc = make_builtin("rate-trap");
    long bad = 0;
    for (std::size_t r = 0; r < 200; ++r) {
      ReplicaStream rng = ReplicaStream::derive(93, r);
      bool low = r % 2 == 0;
      double x0 = low ? 0.25 * rng.uniform() : 0.75 + 0.25 * rng.uniform();
      int i0 = rng.uniform() < 0.5 ? 0 : 1;
      TrajectoryRecord tr = simulate(sc.system, at(x0, 0.0, i0), 100.0, rng, dense);
      auto check = [&](double v) {
        if (low ? v > 0.375 : v < 0.625) ++bad;
      };
      for (const auto& m : tr.marks) check(m.z.x[0]);
      for (const auto& d : tr.dense) check(d.x[0]);
    }
    o.require(bad == 0, "rate-trap: " + std::to_string(bad) + " violations");
  }
  return o;
}

Outcome invasion() {
  Outcome o;
  LVParams p = lv_dwell_params();
  double d1 = delta1(p);
  o.require(std::abs(d1 - 2.0 * std::log(2.0)) <= 1e-12, "delta1 " + fmt("%.12f", d1));
  InvasionEstimate est = invasion_rate(p, HoldingLaw::uniform(0.5, 1.5), HoldingLaw::uniform(d1 + 0.1, d1 + 1.1),
                                       1e4, 101, at(1.0, 0.0, 0));
  o.require(est.upper < 0.0, "upper CI " + fmt("%.4f", est.upper));
  double worst = -INFINITY;
  for (double v : est.excursion_integrals) worst = std::max(worst, v);
  o.require(worst <= 1e-8, "excursion integral " + fmt("%.3e", worst));
  o.detail = "Lambda_y=" + fmt("%.4f", est.value) + " CI upper " + fmt("%.4f", est.upper) + ", " +
             std::to_string(est.excursion_integrals.size()) + " excursions, max " + fmt("%.3f", worst);
  return o;
}

Outcome semigroup() {
  Outcome o;
  SwitchedSystem sys = exponential_flip(1.0);
  std::vector<double> xg(400), tg(200);
  for (std::size_t k = 0; k < xg.size(); ++k) xg[k] = static_cast<double>(k) / 399.0;
  for (std::size_t k = 0; k < tg.size(); ++k) tg[k] = 4.0 * static_cast<double>(k) / 199.0;
  const double t = 1.0;
  int failures = 0;
  double worst = 0.0;
  std::vector<std::function<double(double, double, int)>> fs = {
      [](double, double, int i) { return static_cast<double>(i); },
      [](double x, double, int) { return x; },
  };
  for (std::size_t fi = 0; fi < fs.size(); ++fi) {
    GridFunction1D f = GridFunction1D::tabulate(xg, tg, 2, fs[fi]);
    SemigroupResult res = semigroup_iterate(sys, f, t, 20);
    for (int k = 0; k < 10; ++k) {
      double x = 0.05 + 0.1 * k, s = 0.3 * k;
      int i = k % 2;
      auto reps = simulate_replicas(sys, at(x, s, i), t, 111 + k, 10000, 1);
      std::vector<double> vals;
      for (const auto& r : reps) {
        HybridState zt = state_at(sys, r, t);
        vals.push_back(fs[fi](zt.x[0], zt.s, zt.i));
      }
      MeanSe mc = mean_and_se(vals);
      double h = res.value.interpolate(x, s, i);
      double gap = std::abs(h - mc.mean);
      worst = std::max(worst, gap);
      if (gap > 3.0 * mc.std_error + 1e-3) ++failures;
    }
  }
  o.require(failures == 0, std::to_string(failures) + " probes outside 3 SE + 1e-3");
  o.detail = "max |H^k - MC| " + fmt("%.4f", worst);
  return o;
}

Outcome inflation_tv() {
  Outcome o;
  Scenario sc = make_builtin("inflation");
  auto series = convergence_diagnostic(sc.system, sc.start, sc.alt_start, {1, 2, 4, 8, 16}, 10000, 121, 1);
  o.require(monotone_within_noise(series, 1), "series not decreasing within noise");
  o.require(series.back().tv < 0.1, "TV(16) = " + fmt("%.4f", series.back().tv));
  for (const auto& p : series) o.detail += (o.detail.empty() ? "TV " : ", ") + fmt("%.3f", p.tv);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "inverse-sampling law", inverse_sampling},
      {2, "conditional-law identity", conditional_law},
      {3, "jump-count bound", jump_counts},
      {4, "restricted state space membership", km_membership},
      {5, "Lyapunov closed form and drift", lyapunov_closed_form},
      {6, "bracket rank", bracket_ranks},
      {7, "one-dimensional fixed point", fixed_point},
      {8, "constructive accessibility", algorithm_one},
      {9, "counterexample invariants", counterexamples},
      {10, "invasion rate", invasion},
      {11, "semigroup oracle", semigroup},
      {12, "ergodicity diagnostic", inflation_tv},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
