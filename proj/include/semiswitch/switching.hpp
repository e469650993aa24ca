#pragma once

#include "semiswitch/rng.hpp"
#include "semiswitch/system.hpp"

namespace semiswitch {

// Integral of lambda^i along the flow over [-s, t].
double cumulative_rate(const SwitchedSystem& sys, const HybridState& z, double t);

// G_z(t) = G^i(cumulative_rate(z,t)) / G^i(cumulative_rate(z,0)).
double survival(const SwitchedSystem& sys, const HybridState& z, double t);

// inf{r >= 0 : G_z(r) <= u} for u in (0,1].
double inverse_survival(const SwitchedSystem& sys, const HybridState& z, double u);

struct HoldingDraw {
  double time = 0.0;
  Vec x_end;  // position reached by the flow at the jump time
};

HoldingDraw draw_holding(const SwitchedSystem& sys, const HybridState& z, double u);
double sample_holding(const SwitchedSystem& sys, const HybridState& z, ReplicaStream& rng);

// Target index from the half-open cumulative partition of (0,1] over q_{i,.}.
int select_target(const Mat& q, int i, double v);
HybridState post_jump(const SwitchedSystem& sys, const Vec& x, int i, double v);

double jump_density(const SwitchedSystem& sys, const HybridState& z, double t);

// H(t) = min_i G^i(lambda_max t) and its generalized inverse.
double dominating_survival(const SwitchedSystem& sys, double t);
double dominating_quantile(const SwitchedSystem& sys, double u);

// Time r >= 0 at which the rate integral from (x, 0, i) reaches `level`, plus the position there.
HoldingDraw time_to_cumulative(const SwitchedSystem& sys, const Vec& x, int i, double level);

}  // namespace semiswitch
