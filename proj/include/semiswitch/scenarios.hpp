#pragma once

#include <string>
#include <vector>

#include "semiswitch/estimators.hpp"
#include "semiswitch/system.hpp"

namespace semiswitch {

struct BuiltinInfo {
  std::string name;
  std::string description;
  std::string anchor;
  // Experiment run by default from the command line.
  std::string experiment;
};

struct Scenario {
  BuiltinInfo info;
  SwitchedSystem system;
  HybridState start;
  // Second start used by two-start diagnostics.
  HybridState alt_start;
};

const std::vector<BuiltinInfo>& builtin_catalog();
bool is_builtin(const std::string& name);
// Throws ConfigError for unknown names.
Scenario make_builtin(const std::string& name);

// x' = target - x componentwise, with closed-form flow.
VectorFieldSpec relaxation_field(std::string label, const Vec& target);
// x' = A x + b, with closed-form flow through the matrix exponential.
VectorFieldSpec affine_field(std::string label, const Mat& A, const Vec& b);
VectorFieldSpec constant_field(std::string label, const Vec& v);

// Two-state flip on x' = -x and x' = 1 - x over [0,1] with exponential laws of the given rate.
SwitchedSystem exponential_flip(double rate = 1.0);
// Same fields with arbitrary laws.
SwitchedSystem relaxation_pair(const HoldingLaw& law0, const HoldingLaw& law1);
// Three constant planar fields (1,0), (0,1), (-1,-1) with exponential(1) laws and uniform jumps.
SwitchedSystem constant_drift_plane();

// Lotka-Volterra constants of the dwell-time scenario.
LVParams lv_dwell_params();

// Boundary s = -ln|i - x| of the restricted state space of the relaxation pair.
struct BoundaryPoint {
  double x = 0.0;
  int i = 0;
  double s = 0.0;
};
std::vector<BoundaryPoint> km_boundary(std::size_t points = 1000);

}  // namespace semiswitch
