#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semiswitch/system.hpp"

namespace semiswitch {

enum class AdmissibilityFailure {
  None,
  FirstTimeSupport,
  TransitionPositivity,
  InteriorTimeSupport,
  TailCondition,
  Malformed,
};

const char* to_string(AdmissibilityFailure f);

struct AdmissibilityReport {
  bool verdict = false;
  AdmissibilityFailure failing_condition = AdmissibilityFailure::None;
  int leg = 0;  // 1-based leg attached to the failure, 0 when not applicable
  double tolerance = 1e-9;
  std::string message;
};

// Support membership on the cumulative-rate axis with absolute tolerance eta.
// A duration r from (x,s,i) lies in supp(mu_{x,s}^i) when its rate integral lies in supp(mu^i).
class SupportOracle {
 public:
  explicit SupportOracle(const SwitchedSystem& sys, double eta = 1e-9) : sys_(sys), eta_(eta) {}
  bool contains(int i, double cumulative) const;
  // (cumulative, inf) meets supp(mu^i).
  bool tail_meets(int i, double cumulative) const;
  double eta() const { return eta_; }

 private:
  const SwitchedSystem& sys_;
  double eta_;
};

AdmissibilityReport is_admissible(const SwitchedSystem& sys, const HybridState& z, const ControlSequence& cs,
                                  double eta = 1e-9);

HybridState reach_endpoint(const SwitchedSystem& sys, const HybridState& z, const ControlSequence& cs);

struct Algorithm1Options {
  std::uint64_t seed = 1;
  int lipschitz_samples = 1000;
  double safety = 2.0;
  // Halvings of the step size allowed when the realized error exceeds epsilon.
  int max_refinements = 6;
};

struct Algorithm1Result {
  ControlSequence sequence;
  Vec endpoint;
  Vec target;
  double error = 0.0;
  double step = 0.0;  // h_s(eps)
  double C = 0.0;
  double L = 0.0;
  std::vector<long> iterations;  // WHILE steps per target leg
  std::vector<long> step_bounds;  // ceil(max_l s_l lambda_max / S) per target leg
  int refinements = 0;
};

Algorithm1Result algorithm1(const SwitchedSystem& sys, const Vec& x, const ControlSequence& target, double epsilon,
                            const Algorithm1Options& opt = {});

// Shortest index path from -> ... -> to with positive Q(y) entries; excludes the endpoints.
std::vector<int> witness_path(const Mat& q, int from, int to);

struct FixedPointResult {
  double x = 0.0;
  double contraction = 0.0;
  int iterations = 0;
  std::vector<double> iterates;
};

// Picard iteration of phi^lower_{t0} o phi^upper_{t1} on [lo, hi], where F^lower(lo) = F^upper(hi) = 0.
FixedPointResult fixed_point_1d(const VectorFieldSpec& lower, const VectorFieldSpec& upper, double t0, double t1,
                                double x_init, double tol, double lo = 0.0, double hi = 1.0,
                                const FlowConfig& cfg = {});

struct AccessibleCandidate {
  HybridState z;
  FixedPointResult fixed_point;
  ControlSequence sequence;
};

AccessibleCandidate one_d_accessible_point(const SwitchedSystem& sys, int lower, int upper, double t0, double t1,
                                           int repetitions = 20, double epsilon = 1e-3);

}  // namespace semiswitch
