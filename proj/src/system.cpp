#include "semiswitch/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "semiswitch/errors.hpp"

namespace semiswitch {

void FlowConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw InvalidArgument("integrator tolerances must be positive");
  if (max_step < 0.0) throw InvalidArgument("max_step must be positive (or 0 for automatic)");
}

double ControlSequence::total_time() const {
  double t = 0.0;
  for (double s : times) t += s;
  return t;
}

void ControlSequence::validate() const {
  if (times.size() != indices.size()) throw InvalidArgument("control sequence lengths differ");
  for (double s : times)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("control sequence times must be positive");
}

RateFunction RateFunction::constant_rate(double rate) {
  if (!(rate > 0.0)) throw InvalidArgument("rate must be positive");
  RateFunction r;
  r.eval = [rate](const Vec&) { return rate; };
  r.lambda_min = rate;
  r.lambda_max = rate;
  r.constant = rate;
  return r;
}

JumpMatrix JumpMatrix::constant(Mat q) {
  JumpMatrix j;
  j.eval = [q](const Vec&) { return q; };
  bool positive = true;
  for (Eigen::Index a = 0; a < q.rows(); ++a)
    for (Eigen::Index b = 0; b < q.cols(); ++b)
      if (a != b && q(a, b) <= 0.0) positive = false;
  j.globally_irreducible = positive;
  return j;
}

JumpMatrix JumpMatrix::uniform_off_diagonal(int n) {
  Mat q = Mat::Constant(n, n, n > 1 ? 1.0 / (n - 1) : 0.0);
  q.diagonal().setZero();
  return constant(q);
}

CompactSet CompactSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw InvalidArgument("box bounds mismatch");
  for (Eigen::Index j = 0; j < lo.size(); ++j)
    if (!(lo[j] <= hi[j])) throw InvalidArgument("box bounds must satisfy lo <= hi");
  CompactSet c;
  c.kind_ = Kind::Box;
  c.a_ = std::move(lo);
  c.b_ = std::move(hi);
  return c;
}

CompactSet CompactSet::ball(Vec center, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("ball radius must be nonnegative");
  CompactSet c;
  c.kind_ = Kind::Ball;
  c.a_ = std::move(center);
  c.r_ = radius;
  return c;
}

bool CompactSet::contains(const Vec& x, double tol) const {
  if (x.size() != a_.size()) return false;
  if (kind_ == Kind::Box) {
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (x[j] < a_[j] - tol || x[j] > b_[j] + tol) return false;
    return true;
  }
  return (x - a_).norm() <= r_ + tol;
}

Vec CompactSet::lower() const {
  return kind_ == Kind::Box ? a_ : Vec(a_.array() - r_);
}

Vec CompactSet::upper() const {
  return kind_ == Kind::Box ? b_ : Vec(a_.array() + r_);
}

Vec CompactSet::sample(ReplicaStream& rng) const {
  const auto d = a_.size();
  if (kind_ == Kind::Box) {
    Vec x(d);
    for (Eigen::Index j = 0; j < d; ++j) x[j] = a_[j] + rng.uniform() * (b_[j] - a_[j]);
    return x;
  }
  std::normal_distribution<double> normal;
  Vec v(d);
  do {
    for (Eigen::Index j = 0; j < d; ++j) v[j] = normal(rng);
  } while (v.norm() == 0.0);
  double rad = r_ * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return a_ + rad * v / v.norm();
}

CompactSet CompactSet::enlarged(double margin) const {
  if (kind_ == Kind::Box) return box(a_.array() - margin, b_.array() + margin);
  return ball(a_, r_ + margin);
}

double SwitchedSystem::lambda_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rates) m = std::min(m, r.lambda_min);
  return m;
}

double SwitchedSystem::lambda_max() const {
  double m = 0.0;
  for (const auto& r : rates) m = std::max(m, r.lambda_max);
  return m;
}

bool SwitchedSystem::constant_rates() const {
  return std::all_of(rates.begin(), rates.end(), [](const RateFunction& r) { return r.constant.has_value(); });
}

void SwitchedSystem::validate() const {
  const int n = states();
  if (n < 2) throw InvalidArgument("a switched system needs at least two states");
  if (static_cast<int>(laws.size()) != n || static_cast<int>(rates.size()) != n)
    throw InvalidArgument("fields, laws and rates must have the same length");
  if (!jump.eval) throw InvalidArgument("jump matrix missing");
  for (const auto& f : fields) {
    if (f.dim != dim) throw InvalidArgument("field '" + f.label + "' has the wrong dimension");
    if (!f.rhs) throw InvalidArgument("field '" + f.label + "' has no right-hand side");
  }
  if (compact && compact->dim() != dim) throw InvalidArgument("compact set dimension mismatch");
  flow_config.validate();

  std::vector<Vec> pts;
  if (compact) {
    ReplicaStream rng(0x5eed);
    for (int p = 0; p < 64; ++p) pts.push_back(compact->sample(rng));
    pts.push_back(compact->lower());
    pts.push_back(compact->upper());
  } else {
    pts.push_back(Vec::Zero(dim));
    pts.push_back(Vec::Ones(dim));
  }
  for (int i = 0; i < n; ++i) {
    const auto& r = rates[i];
    if (!(r.lambda_min > 0.0) || !(r.lambda_max >= r.lambda_min))
      throw InvalidArgument("rate bounds must satisfy 0 < lambda_min <= lambda_max");
    if (!r.constant && !r.eval) throw InvalidArgument("rate function missing");
    for (const auto& x : pts) {
      double v = r(x);
      if (!(v >= r.lambda_min * (1 - 1e-12)) || !(v <= r.lambda_max * (1 + 1e-12)))
        throw InvalidArgument("rate " + std::to_string(i) + " leaves its declared bounds");
    }
  }
  for (const auto& x : pts) {
    Mat q = jump(x);
    if (q.rows() != n || q.cols() != n) throw InvalidArgument("jump matrix has the wrong shape");
    for (int i = 0; i < n; ++i) {
      if (q(i, i) != 0.0) throw InvalidArgument("jump matrix diagonal must be zero");
      double row = 0.0;
      for (int j = 0; j < n; ++j) {
        if (!(q(i, j) >= 0.0)) throw InvalidArgument("jump matrix entries must be nonnegative");
        row += q(i, j);
      }
      if (std::abs(row - 1.0) > 1e-12) throw InvalidArgument("jump matrix rows must sum to 1");
    }
    for (auto [a, b] : jump.witness)
      if (a < 0 || a >= n || b < 0 || b >= n || !(q(a, b) > 0.0))
        throw InvalidArgument("irreducibility witness has a non-positive entry");
  }
}

}  // namespace semiswitch
