#include "semiswitch/switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semiswitch/dynamics.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/integrator.hpp"

namespace semiswitch {

namespace {

FlowConfig rate_config(const SwitchedSystem& sys) {
  FlowConfig cfg = sys.flow_config;
  cfg.abs_tol = std::min(cfg.abs_tol, 1e-10);
  cfg.rel_tol = std::min(cfg.rel_tol, 1e-10);
  return cfg;
}

// Integral of lambda along the flow of sign*F for `duration`, starting at x.
double rate_integral(const SwitchedSystem& sys, int i, const Vec& x, double duration, double sign) {
  if (duration <= 0.0) return 0.0;
  const auto& field = sys.fields[i];
  const auto& rate = sys.rates[i];
  const int d = sys.dim;
  Rhs aug = [&field, &rate, d, sign](const Vec& y) {
    Vec out(d + 1);
    Vec x = y.head(d);
    out.head(d) = sign * field.rhs(x);
    out[d] = rate(x);
    return out;
  };
  Vec y0(d + 1);
  y0.head(d) = x;
  y0[d] = 0.0;
  return integrate(aug, y0, duration, rate_config(sys))[d];
}

void check_horizon(const SwitchedSystem& sys, const HybridState& z) {
  double h = sys.fields[z.i].horizon(z.x);
  if (z.s > h) throw BackwardHorizonExceeded("s exceeds the backward horizon");
}

}  // namespace

double cumulative_rate(const SwitchedSystem& sys, const HybridState& z, double t) {
  if (t < -z.s - 1e-15) throw InvalidArgument("cumulative_rate needs t >= -s");
  const auto& rate = sys.rates.at(z.i);
  if (rate.constant) return *rate.constant * std::max(0.0, t + z.s);
  check_horizon(sys, z);
  double past = rate_integral(sys, z.i, z.x, z.s, -1.0);
  if (t >= 0.0) return past + rate_integral(sys, z.i, z.x, t, 1.0);
  return std::max(0.0, past - rate_integral(sys, z.i, z.x, -t, -1.0));
}

double survival(const SwitchedSystem& sys, const HybridState& z, double t) {
  const auto& law = sys.laws.at(z.i);
  double den = law.survival(cumulative_rate(sys, z, 0.0));
  if (!(den > 0.0)) throw NotInK("state is outside K: conditional survival denominator is 0");
  return law.survival(cumulative_rate(sys, z, t)) / den;
}

HoldingDraw time_to_cumulative(const SwitchedSystem& sys, const Vec& x, int i, double level) {
  HoldingDraw out;
  if (level <= 0.0) {
    out.x_end = x;
    return out;
  }
  const auto& rate = sys.rates.at(i);
  if (rate.constant) {
    out.time = level / *rate.constant;
    out.x_end = flow(sys, i, out.time, x);
    return out;
  }
  const auto& field = sys.fields[i];
  const int d = sys.dim;
  Rhs aug = [&field, &rate, d](const Vec& y) {
    Vec o(d + 1);
    Vec p = y.head(d);
    o.head(d) = field.rhs(p);
    o[d] = rate(p);
    return o;
  };
  Vec y0(d + 1);
  y0.head(d) = x;
  y0[d] = 0.0;
  double horizon = level / rate.lambda_min * (1.0 + 1e-9) + 1e-12;
  FlowConfig cfg = rate_config(sys);
  if (cfg.max_step <= 0.0) cfg.max_step = std::max(horizon / 100.0, 1e-12);
  LevelCrossing c = integrate_until(aug, y0, d, level, horizon, cfg);
  if (!c.found) throw IntegrationDiverged("rate integral never reached its target level");
  out.time = c.time;
  out.x_end = c.state.head(d);
  return out;
}

HoldingDraw draw_holding(const SwitchedSystem& sys, const HybridState& z, double u) {
  if (!(u > 0.0) || u > 1.0) throw InvalidArgument("uniform draw must lie in (0,1]");
  const auto& law = sys.laws.at(z.i);
  double c0 = cumulative_rate(sys, z, 0.0);
  double g0 = law.survival(c0);
  if (!(g0 > 0.0)) throw NotInK("state is outside K: conditional survival denominator is 0");
  double target = std::max(c0, law.quantile(u * g0));
  return time_to_cumulative(sys, z.x, z.i, target - c0);
}

double inverse_survival(const SwitchedSystem& sys, const HybridState& z, double u) {
  const auto& law = sys.laws.at(z.i);
  double c0 = cumulative_rate(sys, z, 0.0);
  double g0 = law.survival(c0);
  if (!(g0 > 0.0)) throw NotInK("state is outside K: conditional survival denominator is 0");
  double target = std::max(c0, law.quantile(u * g0));
  if (target <= c0) return 0.0;
  const auto& rate = sys.rates[z.i];
  if (rate.constant) return (target - c0) / *rate.constant;
  return time_to_cumulative(sys, z.x, z.i, target - c0).time;
}

double sample_holding(const SwitchedSystem& sys, const HybridState& z, ReplicaStream& rng) {
  return inverse_survival(sys, z, rng.uniform_open_closed());
}

int select_target(const Mat& q, int i, double v) {
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    double p = q(i, j);
    if (!(p > 0.0)) continue;
    acc += p;
    last = static_cast<int>(j);
    if (v <= acc) return last;
  }
  if (last < 0) throw InvalidArgument("jump matrix row has no positive entry");
  return last;
}

HybridState post_jump(const SwitchedSystem& sys, const Vec& x, int i, double v) {
  return HybridState{x, 0.0, select_target(sys.jump(x), i, v)};
}

double jump_density(const SwitchedSystem& sys, const HybridState& z, double t) {
  const auto& law = sys.laws.at(z.i);
  if (!law.has_density()) throw NoDensity("holding law has no absolutely continuous part");
  double c0 = cumulative_rate(sys, z, 0.0);
  double g0 = law.survival(c0);
  if (!(g0 > 0.0)) throw NotInK("state is outside K: conditional survival denominator is 0");
  double ct = cumulative_rate(sys, z, t);
  double lam = sys.rates[z.i].constant ? *sys.rates[z.i].constant : sys.rates[z.i](flow(sys, z.i, t, z.x));
  return lam * law.density(ct).value_or(0.0) / g0;
}

double dominating_survival(const SwitchedSystem& sys, double t) {
  double lm = sys.lambda_max();
  double h = 1.0;
  for (const auto& law : sys.laws) h = std::min(h, law.survival(lm * t));
  return h;
}

double dominating_quantile(const SwitchedSystem& sys, double u) {
  double lm = sys.lambda_max();
  double q = std::numeric_limits<double>::infinity();
  for (const auto& law : sys.laws) q = std::min(q, law.quantile(u));
  return q / lm;
}

}  // namespace semiswitch
