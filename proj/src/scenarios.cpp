#include "semiswitch/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

#include "semiswitch/errors.hpp"

namespace semiswitch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat flip_matrix() {
  Mat q(2, 2);
  q << 0, 1, 1, 0;
  return q;
}

std::vector<RateFunction> unit_rates(int n) { return std::vector<RateFunction>(n, RateFunction::constant_rate(1.0)); }

HybridState state(std::initializer_list<double> x, double s, int i) {
  Vec v(static_cast<Eigen::Index>(x.size()));
  Eigen::Index k = 0;
  for (double c : x) v[k++] = c;
  return HybridState{v, s, i};
}

// Rationals in (0,1] listed by denominator, reduced fractions only.
std::vector<double> enumerate_rationals(std::size_t count) {
  std::vector<double> out{1.0};
  for (int den = 2; out.size() < count; ++den)
    for (int num = 1; num < den && out.size() < count; ++num)
      if (std::gcd(num, den) == 1) out.push_back(static_cast<double>(num) / den);
  return out;
}

}  // namespace

VectorFieldSpec relaxation_field(std::string label, const Vec& target) {
  const int d = static_cast<int>(target.size());
  std::vector<double> tg(target.data(), target.data() + d);
  auto spec = make_field(std::move(label), d, [tg](auto x, auto out) {
    for (std::size_t k = 0; k < tg.size(); ++k) out[k] = tg[k] - x[k];
  });
  spec.closed_form_flow = [target](double t, const Vec& x) { return Vec(target + (x - target) * std::exp(-t)); };
  spec.closed_form_min_t = -kInf;
  spec.jacobian = [d](const Vec&) { return Mat(-Mat::Identity(d, d)); };
  spec.analytic = true;
  return spec;
}

VectorFieldSpec affine_field(std::string label, const Mat& A, const Vec& b) {
  const int d = static_cast<int>(b.size());
  if (A.rows() != d || A.cols() != d) throw InvalidArgument("affine field shape mismatch");
  auto spec = make_field(std::move(label), d, [A, b, d](auto x, auto out) {
    for (int r = 0; r < d; ++r) {
      auto acc = x[0] * A(r, 0);
      for (int c = 1; c < d; ++c) acc = acc + x[c] * A(r, c);
      out[r] = acc + b[r];
    }
  });
  Mat aug = Mat::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = A;
  aug.topRightCorner(d, 1) = b;
  spec.closed_form_flow = [aug, d](double t, const Vec& x) {
    Mat e = (aug * t).exp();
    Vec y(d + 1);
    y.head(d) = x;
    y[d] = 1.0;
    return Vec((e * y).head(d));
  };
  spec.closed_form_min_t = -kInf;
  spec.jacobian = [A](const Vec&) { return A; };
  spec.analytic = true;
  return spec;
}

VectorFieldSpec constant_field(std::string label, const Vec& v) {
  const int d = static_cast<int>(v.size());
  std::vector<double> c(v.data(), v.data() + d);
  auto spec = make_field(std::move(label), d, [c](auto, auto out) {
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k];
  });
  spec.closed_form_flow = [v](double t, const Vec& x) { return Vec(x + t * v); };
  spec.closed_form_min_t = -kInf;
  spec.jacobian = [d](const Vec&) { return Mat(Mat::Zero(d, d)); };
  spec.analytic = true;
  return spec;
}

SwitchedSystem relaxation_pair(const HoldingLaw& law0, const HoldingLaw& law1) {
  SwitchedSystem s;
  s.name = "relaxation-pair";
  s.dim = 1;
  s.fields = {relaxation_field("toward-0", Vec::Constant(1, 0.0)), relaxation_field("toward-1", Vec::Constant(1, 1.0))};
  s.laws = {law0, law1};
  s.rates = unit_rates(2);
  s.jump = JumpMatrix::constant(flip_matrix());
  s.compact = CompactSet::box(Vec::Constant(1, 0.0), Vec::Constant(1, 1.0));
  return s;
}

SwitchedSystem exponential_flip(double rate) {
  SwitchedSystem s = relaxation_pair(HoldingLaw::exponential(rate), HoldingLaw::exponential(rate));
  s.name = "exponential-flip";
  return s;
}

SwitchedSystem constant_drift_plane() {
  SwitchedSystem s;
  s.name = "constant-drift-plane";
  s.dim = 2;
  s.fields = {constant_field("east", Vec::Unit(2, 0)), constant_field("north", Vec::Unit(2, 1)),
              constant_field("south-west", -Vec::Ones(2))};
  s.laws = std::vector<HoldingLaw>(3, HoldingLaw::exponential(1.0));
  s.rates = unit_rates(3);
  s.jump = JumpMatrix::uniform_off_diagonal(3);
  return s;
}

LVParams lv_dwell_params() {
  LVParams p;
  p.alpha[0] = 1.0;
  p.alpha[1] = 1.0;
  p.beta[0] = 1.0;
  p.beta[1] = 1.0;
  p.a[0] = 1.0;
  p.a[1] = 0.5;
  p.b[0] = 0.5;
  p.b[1] = 0.5;
  p.c[0] = 2.0;
  p.c[1] = 1.0;
  p.d[0] = 1.0;
  p.d[1] = 1.0;
  return p;
}

std::vector<BoundaryPoint> km_boundary(std::size_t points) {
  std::vector<BoundaryPoint> out;
  for (int i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < points; ++k) {
      double x = points > 1 ? static_cast<double>(k) / static_cast<double>(points - 1) : 0.5;
      double gap = std::abs(i - x);
      out.push_back({x, i, gap > 0.0 ? -std::log(gap) : kInf});
    }
  return out;
}

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> catalog = {
      {"km-example", "relaxation toward 0 and 1 with uniform[0,2] holding laws on M = [0,1]",
       "restricted state space example: s in [0, -log|i-x|]", "simulate"},
      {"feller-dirac", "relaxation pair with a Dirac(1) law in state 0 and uniform[0.5,1.5] in state 1",
       "Feller counterexample: first jump time from a Dirac holding law", "simulate"},
      {"non-analytic", "unit drift against 1 + exp(-1/x^2) on x < 0 with uniform[1,2] laws",
       "non-analytic example: F1(x*) - F0(x*) = e^{-4} > 0 at x* = -1/2", "certify-submersion"},
      {"rational-atoms", "drifts +1 and -1 with 64 atoms on the rationals of (0,1] weighted 2^{-k}",
       "rational atoms: mu = sum 2^{-i} delta_{q_i}", "simulate"},
      {"non-irreducible", "four axis relaxations on [0,1]^2 with position-dependent jumps that never mix the axes",
       "no point of K_M is a Doeblin point", "tv-decay"},
      {"dwell-radial", "contraction -x against expansion x in the plane with short and long dwell laws",
       "dwell-time bound: |X_t| >= e^{-3 beta r2} |x|", "simulate"},
      {"rate-trap", "relaxation pair with Dirac laws and position-dependent rates that trap each end",
       "rate trap: there is no accessible point", "simulate"},
      {"inflation", "inflation model 2(+-1 - sinh v) with uniform[0.5,1.5] laws",
       "inflation model 2(I_t - m sinh V): unique stationary distribution", "tv-decay"},
      {"lv-dwell", "Lotka-Volterra extinction face with environment-1 dwell times above delta_1",
       "dwell-time threshold: Lambda_y < 0", "invasion"},
  };
  return catalog;
}

bool is_builtin(const std::string& name) {
  const auto& c = builtin_catalog();
  return std::any_of(c.begin(), c.end(), [&](const BuiltinInfo& b) { return b.name == name; });
}

namespace {

Scenario km_example() {
  Scenario sc;
  sc.system = relaxation_pair(HoldingLaw::uniform(0.0, 2.0), HoldingLaw::uniform(0.0, 2.0));
  sc.start = state({0.5}, 0.0, 0);
  sc.alt_start = state({0.9}, 0.0, 1);
  return sc;
}

Scenario feller_dirac() {
  Scenario sc;
  sc.system = relaxation_pair(HoldingLaw::dirac(1.0), HoldingLaw::uniform(0.5, 1.5));
  sc.start = state({0.5}, 0.0, 0);
  sc.alt_start = state({0.5}, 0.5, 0);
  return sc;
}

Scenario non_analytic() {
  Scenario sc;
  auto& s = sc.system;
  s.dim = 1;
  s.fields = {constant_field("unit", Vec::Constant(1, 1.0)),
              make_field("unit-plus-flat", 1, [](auto x, auto out) {
                using T = std::decay_t<decltype(x[0])>;
                using std::exp;
                if (primal(x[0]) < 0.0) out[0] = T(1.0) + exp(T(-1.0) / (x[0] * x[0]));
                else out[0] = T(1.0);
              })};
  s.fields[1].analytic = false;
  s.laws = {HoldingLaw::uniform(1.0, 2.0), HoldingLaw::uniform(1.0, 2.0)};
  s.rates = unit_rates(2);
  s.jump = JumpMatrix::constant(flip_matrix());
  sc.start = state({-2.0}, 0.0, 0);
  sc.alt_start = state({-1.0}, 0.0, 1);
  return sc;
}

Scenario rational_atoms() {
  Scenario sc;
  auto& s = sc.system;
  s.dim = 1;
  std::vector<double> q = enumerate_rationals(64);
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t k = 0; k < q.size(); ++k) atoms.emplace_back(q[k], std::ldexp(1.0, -static_cast<int>(k + 1)));
  s.fields = {constant_field("plus", Vec::Constant(1, 1.0)), constant_field("minus", Vec::Constant(1, -1.0))};
  s.laws = {HoldingLaw::atoms(atoms), HoldingLaw::atoms(atoms)};
  s.rates = unit_rates(2);
  s.jump = JumpMatrix::constant(flip_matrix());
  sc.start = state({0.0}, 0.0, 0);
  sc.alt_start = state({0.0}, 0.0, 1);
  return sc;
}

Scenario non_irreducible() {
  Scenario sc;
  auto& s = sc.system;
  s.dim = 2;
  s.fields = {affine_field("x-to-0", Eigen::Matrix2d{{-1, 0}, {0, 0}}, Vec::Zero(2)),
              affine_field("x-to-1", Eigen::Matrix2d{{-1, 0}, {0, 0}}, Vec::Unit(2, 0)),
              affine_field("y-to-0", Eigen::Matrix2d{{0, 0}, {0, -1}}, Vec::Zero(2)),
              affine_field("y-to-1", Eigen::Matrix2d{{0, 0}, {0, -1}}, Vec::Unit(2, 1))};
  double l4 = std::log(4.0);
  s.laws = std::vector<HoldingLaw>(4, HoldingLaw::uniform(l4, l4 + 1.0));
  s.rates = unit_rates(4);
  s.jump.eval = [](const Vec& p) {
    auto ramp = [](double v) { return std::clamp(v, 0.0, 1.0); };
    double w = ramp((p[0] - 0.25) / 0.5), v = ramp((0.75 - p[0]) / 0.5);
    double wy = ramp((p[1] - 0.25) / 0.5), vy = ramp((0.75 - p[1]) / 0.5);
    Mat q = Mat::Zero(4, 4);
    q(0, 1) = 1.0 - 2.0 * w / 3.0;
    q(0, 2) = q(0, 3) = w / 3.0;
    q(1, 0) = 1.0 - 2.0 * v / 3.0;
    q(1, 2) = q(1, 3) = v / 3.0;
    q(2, 3) = 1.0 - 2.0 * wy / 3.0;
    q(2, 0) = q(2, 1) = wy / 3.0;
    q(3, 2) = 1.0 - 2.0 * vy / 3.0;
    q(3, 0) = q(3, 1) = vy / 3.0;
    return q;
  };
  s.compact = CompactSet::box(Vec::Zero(2), Vec::Ones(2));
  sc.start = state({0.5, 0.2}, 0.0, 0);
  sc.alt_start = state({0.5, 0.8}, 0.0, 0);
  return sc;
}

Scenario dwell_radial() {
  Scenario sc;
  auto& s = sc.system;
  s.dim = 2;
  s.fields = {affine_field("contract", -Mat::Identity(2, 2), Vec::Zero(2)),
              affine_field("expand", Mat::Identity(2, 2), Vec::Zero(2))};
  s.laws = {HoldingLaw::uniform(0.0, 0.5), HoldingLaw::uniform(1.0, 2.0)};
  s.rates = unit_rates(2);
  s.jump = JumpMatrix::constant(flip_matrix());
  sc.start = state({1.0, 0.0}, 0.0, 0);
  sc.alt_start = state({0.0, 1.0}, 0.0, 1);
  return sc;
}

Scenario rate_trap() {
  Scenario sc;
  sc.system = relaxation_pair(HoldingLaw::dirac(1.0), HoldingLaw::dirac(1.0));
  const double t0 = 1.05 * std::log(1.5), t1 = 0.95 * std::log(1.2);
  const double u0 = 0.95 * std::log(1.2), u1 = 1.05 * std::log(1.5);
  auto ramp = [](double lowv, double highv) {
    RateFunction r;
    r.eval = [lowv, highv](const Vec& x) {
      double w = std::clamp((x[0] - 0.375) / 0.25, 0.0, 1.0);
      return (1.0 - w) * lowv + w * highv;
    };
    r.lambda_min = std::min(lowv, highv);
    r.lambda_max = std::max(lowv, highv);
    return r;
  };
  sc.system.rates = {ramp(1.0 / t0, 1.0 / u0), ramp(1.0 / t1, 1.0 / u1)};
  sc.start = state({0.2}, 0.0, 1);
  sc.alt_start = state({0.8}, 0.0, 0);
  return sc;
}

Scenario inflation() {
  Scenario sc;
  auto& s = sc.system;
  s.dim = 1;
  s.fields = {make_field("up", 1, [](auto v, auto out) {
                 using std::sinh;
                 out[0] = 2.0 * (1.0 - sinh(v[0]));
               }),
              make_field("down", 1, [](auto v, auto out) {
                 using std::sinh;
                 out[0] = 2.0 * (-1.0 - sinh(v[0]));
               })};
  for (auto& f : s.fields) f.analytic = true;
  s.laws = {HoldingLaw::uniform(0.5, 1.5), HoldingLaw::uniform(0.5, 1.5)};
  s.rates = unit_rates(2);
  s.jump = JumpMatrix::constant(flip_matrix());
  double e = std::asinh(1.0);
  s.compact = CompactSet::box(Vec::Constant(1, -e), Vec::Constant(1, e));
  sc.start = state({-0.85}, 0.0, 0);
  sc.alt_start = state({0.85}, 0.0, 1);
  return sc;
}

Scenario lv_dwell() {
  Scenario sc;
  LVParams p = lv_dwell_params();
  double d1 = delta1(p);
  sc.system = lv_extinction_system(p, HoldingLaw::uniform(0.5, 1.5), HoldingLaw::uniform(d1 + 0.1, d1 + 1.1));
  sc.start = state({1.0}, 0.0, 0);
  sc.alt_start = state({2.0}, 0.0, 1);
  return sc;
}

}  // namespace

Scenario make_builtin(const std::string& name) {
  Scenario sc;
  if (name == "km-example") sc = km_example();
  else if (name == "feller-dirac") sc = feller_dirac();
  else if (name == "non-analytic") sc = non_analytic();
  else if (name == "rational-atoms") sc = rational_atoms();
  else if (name == "non-irreducible") sc = non_irreducible();
  else if (name == "dwell-radial") sc = dwell_radial();
  else if (name == "rate-trap") sc = rate_trap();
  else if (name == "inflation") sc = inflation();
  else if (name == "lv-dwell") sc = lv_dwell();
  else throw ConfigError("unknown builtin scenario '" + name + "'");
  for (const auto& b : builtin_catalog())
    if (b.name == name) sc.info = b;
  sc.system.name = name;
  return sc;
}

}  // namespace semiswitch
