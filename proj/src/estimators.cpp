#include "semiswitch/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "semiswitch/dynamics.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/parallel.hpp"
#include "semiswitch/stats.hpp"
#include "semiswitch/switching.hpp"

namespace semiswitch {

int AxisSpec::bin_of(double v) const {
  if (!(v > lo)) return 0;
  int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
  return std::clamp(k, 0, bins - 1);
}

std::size_t HistogramAxes::cells() const {
  std::size_t n = static_cast<std::size_t>(states) * static_cast<std::size_t>(tau.bins);
  for (const auto& a : x) n *= static_cast<std::size_t>(a.bins);
  return n;
}

HistogramAxes HistogramAxes::defaults(const SwitchedSystem& sys, int x_bins, int tau_bins) {
  if (!sys.compact) throw InvalidArgument("default histogram axes need a compact set");
  HistogramAxes ax;
  Vec lo = sys.compact->lower(), hi = sys.compact->upper();
  for (int k = 0; k < sys.dim; ++k) ax.x.push_back({lo[k], hi[k], x_bins});
  double tmax = 0.0;
  for (const auto& law : sys.laws) tmax = std::max(tmax, law.quantile(1e-3));
  tmax /= sys.lambda_min();
  ax.tau = {0.0, tmax > 0.0 ? tmax : 1.0, tau_bins};
  ax.states = sys.states();
  return ax;
}

Histogram::Histogram(HistogramAxes axes) : axes_(std::move(axes)) {
  for (const auto& a : axes_.x)
    if (a.bins < 1 || !(a.hi > a.lo)) throw InvalidArgument("histogram axis needs hi > lo and at least one bin");
  if (axes_.tau.bins < 1 || !(axes_.tau.hi > axes_.tau.lo)) throw InvalidArgument("invalid delay axis");
  if (axes_.states < 1) throw InvalidArgument("histogram needs at least one state");
  counts_.assign(axes_.cells(), 0.0);
}

std::size_t Histogram::index(const Vec& x, double tau, int i) const {
  std::size_t k = static_cast<std::size_t>(i);
  for (std::size_t c = 0; c < axes_.x.size(); ++c)
    k = k * static_cast<std::size_t>(axes_.x[c].bins) + static_cast<std::size_t>(axes_.x[c].bin_of(x[c]));
  return k * static_cast<std::size_t>(axes_.tau.bins) + static_cast<std::size_t>(axes_.tau.bin_of(tau));
}

void Histogram::add(const Vec& x, double tau, int i, double weight) {
  if (i < 0 || i >= axes_.states) throw InvalidArgument("state index outside the histogram axis");
  counts_[index(x, tau, i)] += weight;
  total_ += weight;
}

void Histogram::merge(const Histogram& other) {
  if (!(axes_ == other.axes_)) throw AxisMismatch("histograms have different axes");
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  total_ += other.total_;
}

std::vector<double> Histogram::normalized() const {
  std::vector<double> p(counts_.size(), 0.0);
  if (total_ <= 0.0) return p;
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = counts_[k] / total_;
  return p;
}

namespace {

// Strides of the flattened layout (state, x_1..x_d, tau).
std::vector<std::size_t> strides(const HistogramAxes& ax) {
  std::vector<std::size_t> dims{static_cast<std::size_t>(ax.states)};
  for (const auto& a : ax.x) dims.push_back(static_cast<std::size_t>(a.bins));
  dims.push_back(static_cast<std::size_t>(ax.tau.bins));
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size() - 1; k-- > 0;) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

std::vector<double> marginal(const Histogram& h, std::size_t axis, std::size_t size) {
  auto s = strides(h.axes());
  auto p = h.normalized();
  std::vector<double> out(size, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) out[(k / s[axis]) % size] += p[k];
  return out;
}

}  // namespace

std::vector<double> Histogram::state_marginal() const {
  return marginal(*this, 0, static_cast<std::size_t>(axes_.states));
}

std::vector<double> Histogram::tau_marginal() const {
  return marginal(*this, axes_.x.size() + 1, static_cast<std::size_t>(axes_.tau.bins));
}

std::vector<double> Histogram::x_marginal(int coord) const {
  if (coord < 0 || coord >= static_cast<int>(axes_.x.size())) throw InvalidArgument("coordinate out of range");
  return marginal(*this, static_cast<std::size_t>(coord) + 1, static_cast<std::size_t>(axes_.x[coord].bins));
}

void Histogram::write_csv(std::ostream& os) const {
  const std::size_t d = axes_.x.size();
  os << "i";
  for (std::size_t c = 0; c < d; ++c) os << ",x" << c + 1 << "_lo,x" << c + 1 << "_hi";
  os << ",tau_lo,tau_hi,mass\n";
  auto s = strides(axes_);
  auto p = normalized();
  os.precision(17);
  for (std::size_t k = 0; k < p.size(); ++k) {
    os << (k / s[0]) % static_cast<std::size_t>(axes_.states);
    for (std::size_t c = 0; c < d; ++c) {
      int b = static_cast<int>((k / s[c + 1]) % static_cast<std::size_t>(axes_.x[c].bins));
      os << ',' << axes_.x[c].edge(b) << ',' << axes_.x[c].edge(b + 1);
    }
    int b = static_cast<int>(k % static_cast<std::size_t>(axes_.tau.bins));
    os << ',' << axes_.tau.edge(b) << ',' << axes_.tau.edge(b + 1) << ',' << p[k] << '\n';
  }
}

std::string Histogram::to_json() const {
  nlohmann::json j;
  auto edges = [](const AxisSpec& a) {
    std::vector<double> e;
    for (int k = 0; k <= a.bins; ++k) e.push_back(a.edge(k));
    return e;
  };
  j["x_edges"] = nlohmann::json::array();
  for (const auto& a : axes_.x) j["x_edges"].push_back(edges(a));
  j["tau_edges"] = edges(axes_.tau);
  j["states"] = axes_.states;
  j["total"] = total_;
  j["mass"] = normalized();
  return j.dump();
}

double tv_distance(const Histogram& a, const Histogram& b) {
  if (!(a.axes() == b.axes())) throw AxisMismatch("histograms have different axes");
  auto p = a.normalized(), q = b.normalized();
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

Histogram occupation_measure(const SwitchedSystem& sys, const HybridState& z0, double T, double burn_in,
                             const HistogramAxes& axes, const OccupationOptions& opt) {
  if (!(T > burn_in) || burn_in < 0.0) throw InvalidArgument("need 0 <= burn_in < T");
  if (!(opt.dt > 0.0)) throw InvalidArgument("sampling step must be positive");
  std::vector<double> grid;
  for (std::size_t k = 1;; ++k) {
    double t = burn_in + opt.dt * static_cast<double>(k);
    if (t > T * (1.0 + 1e-12)) break;
    grid.push_back(std::min(t, T));
  }
  SimulationOptions so;
  so.sample_times = grid;
  std::size_t reps = opt.mode == OccupationMode::Replicas ? std::max<std::size_t>(opt.replicas, 1) : 1;
  std::vector<Histogram> parts(reps, Histogram(axes));
  parallel_for(reps, opt.threads, [&](std::size_t r) {
    ReplicaStream rng = ReplicaStream::derive(opt.seed, r);
    TrajectoryRecord tr = simulate(sys, z0, T, rng, so);
    for (const auto& d : tr.dense) parts[r].add(d.x, d.tau, d.i);
  });
  Histogram h(axes);
  for (const auto& p : parts) h.merge(p);
  return h;
}

std::vector<TvPoint> convergence_diagnostic(const SwitchedSystem& sys, const HybridState& za,
                                            const HybridState& zb, const std::vector<double>& times,
                                            std::size_t replicas, std::uint64_t seed, int threads,
                                            const std::optional<HistogramAxes>& axes) {
  if (times.empty() || replicas == 0) return {};
  HistogramAxes ax = axes ? *axes : HistogramAxes::defaults(sys, 16, 4);
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const double tmax = sorted.back();
  auto collect = [&](const HybridState& z0, std::uint64_t stream_seed) {
    std::vector<Histogram> per_time(sorted.size(), Histogram(ax));
    std::vector<std::vector<HybridState>> states(replicas);
    parallel_for(replicas, threads, [&](std::size_t r) {
      ReplicaStream rng = ReplicaStream::derive(stream_seed, r);
      TrajectoryRecord tr = simulate(sys, z0, tmax, rng);
      for (double t : sorted) states[r].push_back(state_at(sys, tr, t));
    });
    for (std::size_t r = 0; r < replicas; ++r)
      for (std::size_t k = 0; k < sorted.size(); ++k) per_time[k].add(states[r][k].x, states[r][k].s, states[r][k].i);
    return per_time;
  };
  auto ha = collect(za, seed);
  auto hb = collect(zb, mix64(seed ^ 0x5bd1e995u));
  std::vector<TvPoint> out;
  const double n = static_cast<double>(replicas);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    TvPoint p;
    p.t = sorted[k];
    p.tv = tv_distance(ha[k], hb[k]);
    auto a = ha[k].normalized(), b = hb[k].normalized();
    double noise = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
      double r = 0.5 * (a[c] + b[c]);
      noise += std::sqrt(r * (1.0 - r) * (2.0 / n));
    }
    p.noise = 0.5 * std::sqrt(2.0 / std::numbers::pi) * noise;
    out.push_back(p);
  }
  return out;
}

bool monotone_within_noise(const std::vector<TvPoint>& series, int allowed) {
  int inversions = 0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k].tv <= series[k - 1].tv) continue;
    double slack = 3.0 * std::max(series[k].noise, series[k - 1].noise);
    if (series[k].tv - series[k - 1].tv > slack) return false;
    ++inversions;
  }
  return inversions <= allowed;
}

void LVParams::validate(bool dominance) const {
  for (int i = 0; i < 2; ++i) {
    if (!(alpha[i] > 0 && beta[i] > 0 && a[i] > 0 && b[i] > 0 && c[i] > 0 && d[i] > 0))
      throw InvalidArgument("Lotka-Volterra constants must be positive");
    if (dominance && !(a[i] < c[i] && b[i] < d[i]))
      throw InvalidArgument("dominance requires a_i < c_i and b_i < d_i");
  }
  if (!(p(0) < p(1))) throw InvalidArgument("environments must be ordered with p0 < p1");
}

namespace {

VectorFieldSpec logistic_field(std::string label, double alpha, double a) {
  auto spec = make_field(std::move(label), 1, [alpha, a](auto x, auto out) { out[0] = alpha * x[0] * (1.0 - a * x[0]); });
  const double p = 1.0 / a;
  spec.closed_form_flow = [alpha, p](double t, const Vec& x) {
    if (x[0] == 0.0) return Vec(x);
    return Vec(Vec::Constant(1, p / (1.0 + (p / x[0] - 1.0) * std::exp(-alpha * t))));
  };
  spec.closed_form_min_t = -std::numeric_limits<double>::infinity();
  spec.backward_horizon = [alpha, p](const Vec& x) {
    if (x[0] <= p) return std::numeric_limits<double>::infinity();
    return -std::log(1.0 - p / x[0]) / alpha;
  };
  spec.jacobian = [alpha, a](const Vec& x) { return Mat(Mat::Constant(1, 1, alpha * (1.0 - 2.0 * a * x[0]))); };
  spec.analytic = true;
  return spec;
}

double gk(const std::function<double(double)>& g, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, lo, hi, 10, 1e-13);
}

// Integral of beta (1 - c x(u)) over [u0, u1] along the logistic solution x(u) = P / (1 + K e^{-alpha u}).
double logistic_growth_integral(double beta, double c, double P, double alpha, double x0, double u0, double u1) {
  const double K = P / x0 - 1.0;
  auto antiderivative = [&](double u) { return alpha * u + std::log1p(K * std::exp(-alpha * u)); };
  return beta * (u1 - u0) - beta * c * P / alpha * (antiderivative(u1) - antiderivative(u0));
}

}  // namespace

SwitchedSystem lv_extinction_system(const LVParams& p, const HoldingLaw& law0, const HoldingLaw& law1) {
  p.validate();
  SwitchedSystem sys;
  sys.name = "lv-extinction-face";
  sys.dim = 1;
  sys.fields = {logistic_field("resident-0", p.alpha[0], p.a[0]), logistic_field("resident-1", p.alpha[1], p.a[1])};
  sys.laws = {law0, law1};
  sys.rates = {RateFunction::constant_rate(1.0), RateFunction::constant_rate(1.0)};
  Mat q(2, 2);
  q << 0, 1, 1, 0;
  sys.jump = JumpMatrix::constant(q);
  sys.compact = CompactSet::box(Vec::Constant(1, p.p(0)), Vec::Constant(1, p.p(1)));
  return sys;
}

double excursion_integral(const LVParams& p, double x, double T) {
  const double P = p.p(1), al = p.alpha[1];
  auto h = [&](double u) {
    double xu = P / (1.0 + (P / x - 1.0) * std::exp(-al * u));
    return p.beta[1] * (1.0 - p.c[1] * xu);
  };
  return gk(h, 0.0, T);
}

InvasionEstimate invasion_rate(const LVParams& p, const HoldingLaw& law0, const HoldingLaw& law1, double T,
                               std::uint64_t seed, const HybridState& z0, std::size_t batches) {
  if (!(T > 0.0)) throw InvalidArgument("horizon must be positive");
  SwitchedSystem sys = lv_extinction_system(p, law0, law1);
  ReplicaStream rng = ReplicaStream::derive(seed, 0);
  TrajectoryRecord tr = simulate(sys, z0, T, rng);
  const double width = T / static_cast<double>(batches);
  std::vector<double> batch(batches, 0.0);
  InvasionEstimate est;
  est.jumps = tr.marks.size() - 1;
  for (std::size_t k = 0; k < tr.marks.size(); ++k) {
    const HybridState& z = tr.marks[k].z;
    double start = tr.marks[k].t;
    double end = k + 1 < tr.marks.size() ? tr.marks[k + 1].t : T;
    const int i = z.i;
    const double x = z.x[0];
    auto b0 = static_cast<std::size_t>(std::min(std::floor(start / width), static_cast<double>(batches - 1)));
    double a = start;
    for (std::size_t b = b0; b < batches && a < end; ++b) {
      double stop = b + 1 == batches ? end : std::min(end, width * static_cast<double>(b + 1));
      batch[b] += logistic_growth_integral(p.beta[i], p.c[i], p.p(i), p.alpha[i], x, a - start, stop - start);
      a = stop;
    }
    if (i == 1 && k + 1 < tr.marks.size() && k > 0) est.excursion_integrals.push_back(excursion_integral(p, x, end - start));
  }
  for (auto& v : batch) v /= width;
  BatchMeans bm = batch_means(batch, batches);
  est.value = bm.mean;
  est.std_error = bm.std_error;
  est.lower = bm.lower;
  est.upper = bm.upper;
  return est;
}

double delta1(const LVParams& p) {
  double cp = p.c[1] * p.p(1);
  if (!(cp > 1.0)) throw DegenerateThreshold("c1 p1 <= 1: the environment-1 growth term is already nonpositive");
  return cp / (p.alpha[1] * (cp - 1.0)) * std::log(p.p(1) / p.p(0));
}

double excursion_integral_bound(const LVParams& p, double T) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  double cp = p.c[1] * p.p(1);
  return p.beta[1] * T * (1.0 - cp) + p.beta[1] * cp / p.alpha[1] * std::log(p.p(1) / p.p(0));
}

}  // namespace semiswitch
