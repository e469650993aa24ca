#include "semiswitch/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "semiswitch/errors.hpp"

namespace semiswitch {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool finite(const Vec& v) { return v.allFinite(); }

struct Step {
  Vec y1;
  Vec k7;
  double err = 0.0;
  Mat coeff;
};

Step dopri_step(const Rhs& f, const Vec& y, const Vec& k1, double h, const FlowConfig& cfg,
                bool want_dense) {
  Vec k2 = f(y + h * a21 * k1);
  Vec k3 = f(y + h * (a31 * k1 + a32 * k2));
  Vec k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  Vec k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  Vec k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Step s;
  s.y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  s.k7 = f(s.y1);
  Vec e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * s.k7);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[j]), std::abs(s.y1[j]));
    double r = e[j] / sc;
    acc += r * r;
  }
  s.err = std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, y.size())));
  if (!std::isfinite(s.err) || !finite(s.y1)) s.err = std::numeric_limits<double>::infinity();
  if (want_dense && std::isfinite(s.err)) {
    s.coeff.resize(y.size(), 5);
    Vec ydiff = s.y1 - y;
    Vec bspl = h * k1 - ydiff;
    s.coeff.col(0) = y;
    s.coeff.col(1) = ydiff;
    s.coeff.col(2) = bspl;
    s.coeff.col(3) = ydiff - h * s.k7 - bspl;
    s.coeff.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * s.k7);
  }
  return s;
}

Mat hermite_coeff(const Vec& y0, const Vec& y1, const Vec& f0, const Vec& f1, double h) {
  Mat c(y0.size(), 5);
  Vec ydiff = y1 - y0;
  Vec bspl = h * f0 - ydiff;
  c.col(0) = y0;
  c.col(1) = ydiff;
  c.col(2) = bspl;
  c.col(3) = ydiff - h * f1 - bspl;
  c.col(4).setZero();
  return c;
}

// Visits each accepted step; the visitor returns false to stop early.
template <class Visitor>
Vec drive(const Rhs& f, const Vec& x0, double duration, const FlowConfig& cfg, bool want_dense,
          Visitor&& visit) {
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw InvalidArgument("integration duration must be finite and nonnegative");
  if (!finite(x0)) throw IntegrationDiverged("non-finite initial state");
  Vec y = x0;
  if (duration == 0.0) return y;
  const double cap = cfg.step_cap(duration);
  Vec k1 = f(y);
  if (!finite(k1)) throw IntegrationDiverged("non-finite vector field value");
  double t = 0.0;
  long steps = 0;

  if (cfg.kind == FlowConfig::Kind::Rk4) {
    long n = std::max<long>(1, static_cast<long>(std::ceil(duration / cap - 1e-12)));
    double h = duration / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      Vec a = k1;
      Vec b = f(y + 0.5 * h * a);
      Vec c = f(y + 0.5 * h * b);
      Vec d = f(y + h * c);
      Vec y1 = y + h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
      Vec f1 = f(y1);
      if (!finite(y1) || !finite(f1)) throw IntegrationDiverged("fixed-step integration diverged");
      StepInterpolant s{t, h, want_dense ? hermite_coeff(y, y1, k1, f1, h) : Mat()};
      y = y1;
      k1 = f1;
      t = (k + 1 == n) ? duration : t + h;
      if (!visit(s, y)) return y;
    }
    return y;
  }

  double h;
  {
    double n0 = 0.0, n1 = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[j]);
      n0 += (y[j] / sc) * (y[j] / sc);
      n1 += (k1[j] / sc) * (k1[j] / sc);
    }
    n0 = std::sqrt(n0);
    n1 = std::sqrt(n1);
    h = (n0 < 1e-5 || n1 < 1e-5) ? 1e-6 : 0.01 * n0 / n1;
    h = std::clamp(h, 1e-10 * duration, cap);
  }
  while (t < duration) {
    if (++steps > cfg.max_steps) throw IntegrationDiverged("step budget exhausted");
    bool last = false;
    if (t + h >= duration * (1.0 - 1e-14)) {
      h = duration - t;
      last = true;
    }
    Step s = dopri_step(f, y, k1, h, cfg, want_dense);
    if (s.err <= 1.0) {
      StepInterpolant interp{t, h, std::move(s.coeff)};
      t = last ? duration : t + h;
      y = std::move(s.y1);
      k1 = std::move(s.k7);
      if (!visit(interp, y)) return y;
      double fac = s.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(s.err, -0.2), 0.2, 5.0);
      h = std::min(h * fac, cap);
    } else {
      double fac = std::isfinite(s.err) ? std::clamp(0.9 * std::pow(s.err, -0.2), 0.1, 0.9) : 0.1;
      h *= fac;
      if (h < 1e-14 * std::max(1.0, t)) throw IntegrationDiverged("step size underflow");
    }
  }
  return y;
}

}  // namespace

Vec StepInterpolant::at_theta(double theta) const {
  double th1 = 1.0 - theta;
  return coeff.col(0) +
         theta * (coeff.col(1) + th1 * (coeff.col(2) + theta * (coeff.col(3) + th1 * coeff.col(4))));
}

double StepInterpolant::component_at(int c, double theta) const {
  double th1 = 1.0 - theta;
  return coeff(c, 0) +
         theta * (coeff(c, 1) + th1 * (coeff(c, 2) + theta * (coeff(c, 3) + th1 * coeff(c, 4))));
}

Vec DenseSolution::at(double t) const {
  if (steps_.empty()) return initial;
  if (t <= 0.0) return initial;
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double v, const StepInterpolant& s) { return v < s.t0; });
  if (it != steps_.begin()) --it;
  double theta = it->h > 0.0 ? std::clamp((t - it->t0) / it->h, 0.0, 1.0) : 0.0;
  return it->at_theta(theta);
}

Vec integrate(const Rhs& f, const Vec& x0, double duration, const FlowConfig& cfg) {
  return drive(f, x0, duration, cfg, false, [](const StepInterpolant&, const Vec&) { return true; });
}

DenseSolution integrate_dense(const Rhs& f, const Vec& x0, double duration, const FlowConfig& cfg) {
  DenseSolution sol;
  sol.initial = x0;
  drive(f, x0, duration, cfg, true, [&](const StepInterpolant& s, const Vec&) {
    sol.push(s);
    return true;
  });
  return sol;
}

std::vector<Vec> integrate_at(const Rhs& f, const Vec& x0, const std::vector<double>& times,
                              const FlowConfig& cfg) {
  std::vector<Vec> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  double end = times.back();
  size_t next = 0;
  while (next < times.size() && times[next] <= 0.0) {
    out.push_back(x0);
    ++next;
  }
  if (next == times.size()) return out;
  Vec last = drive(f, x0, end, cfg, true, [&](const StepInterpolant& s, const Vec& y1) {
    double t1 = s.t0 + s.h;
    while (next < times.size() && times[next] < t1) {
      out.push_back(s.at(times[next]));
      ++next;
    }
    (void)y1;
    return true;
  });
  while (next < times.size()) {
    out.push_back(last);
    ++next;
  }
  return out;
}

LevelCrossing integrate_until(const Rhs& f, const Vec& x0, int c, double level,
                              double max_duration, const FlowConfig& cfg) {
  LevelCrossing result;
  if (x0[c] >= level) {
    result.found = true;
    result.state = x0;
    return result;
  }
  StepInterpolant hit;
  bool found = false;
  Vec end = drive(f, x0, max_duration, cfg, true, [&](const StepInterpolant& s, const Vec& y1) {
    if (y1[c] >= level) {
      hit = s;
      found = true;
      return false;
    }
    return true;
  });
  if (!found) {
    result.time = max_duration;
    result.state = end;
    return result;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hit.component_at(c, mid) >= level) hi = mid;
    else lo = mid;
  }
  // Re-step from the start of the bracketing step to the located time, then a Newton correction.
  Vec y0 = hit.coeff.col(0);
  double dt = hi * hit.h;
  Vec y = dopri_step(f, y0, f(y0), dt, cfg, false).y1;
  Vec fy = f(y);
  if (fy[c] > 0.0) {
    double corr = (level - y[c]) / fy[c];
    if (std::abs(corr) < 0.5 * hit.h) {
      y = y + corr * fy;
      dt += corr;
    }
  }
  result.found = true;
  result.time = hit.t0 + dt;
  result.state = y;
  return result;
}

}  // namespace semiswitch
