#pragma once

#include <string>
#include <vector>

#include "semiswitch/rng.hpp"
#include "semiswitch/system.hpp"
#include "semiswitch/vector_field.hpp"

namespace semiswitch {

using FieldList = std::vector<VectorFieldSpec>;

Vec flow(const VectorFieldSpec& field, double t, const Vec& x, const FlowConfig& cfg = {});
Vec flow(const SwitchedSystem& sys, int i, double t, const Vec& x);

struct CompositeFlowResult {
  Vec endpoint;
  // x_1 = x, ..., x_{m+1} = endpoint.
  std::vector<Vec> points;
};

CompositeFlowResult composite_flow(const FieldList& fields, const ControlSequence& cs, const Vec& x,
                                   const FlowConfig& cfg = {});
CompositeFlowResult composite_flow(const SwitchedSystem& sys, const ControlSequence& cs, const Vec& x);

Mat jacobian(const VectorFieldSpec& field, const Vec& x);
Mat jacobian_fd(const VectorFieldSpec& field, const Vec& x);
// Directional derivative DF(x) v; exact when the field carries dual evaluators.
Vec directional_derivative(const VectorFieldSpec& field, const Vec& x, const Vec& v);

// [F^i, F^j](x) = DF^j(x) F^i(x) - DF^i(x) F^j(x).
Vec lie_bracket(const VectorFieldSpec& fi, const VectorFieldSpec& fj, const Vec& x);
Vec lie_bracket(const SwitchedSystem& sys, int i, int j, const Vec& x);

enum class BracketMode { Weak, Strong };

struct BracketOptions {
  int depth = 3;
  size_t max_family = 4096;
  double dedup_tol = 1e-10;
  double rel_cutoff = 1e-8;
};

struct BracketRankResult {
  int rank = 0;
  std::vector<Vec> vectors;
  std::vector<std::string> labels;
  Vec singular_values;
  bool exact = false;
};

BracketRankResult bracket_rank(const FieldList& fields, const Vec& x, BracketMode mode,
                               const BracketOptions& opt = {});

// Number of singular values above max(rel_cutoff * sigma_max, abs_floor).
int numerical_rank(const Mat& m, double rel_cutoff, double abs_floor = 0.0, Vec* singular_values = nullptr);

struct SubmersionJacobian {
  Mat jacobian;
  int rank = 0;
  Vec singular_values;
};

// Jacobian in v of v -> phi^{i_{m+1}}_{T - sum v} o Phi_v(x) at v = times.
SubmersionJacobian submersion_jacobian(const FieldList& fields, const Vec& x, const std::vector<int>& indices,
                                       const std::vector<double>& times, double T, const FlowConfig& cfg = {});

struct LipschitzConstants {
  double C = 0.0;
  double L = 0.0;
};

// Sup of |F^i| and |DF^i| over points reachable from M by composite flows of total time <= T.
LipschitzConstants composite_lipschitz(const FieldList& fields, const CompactSet& M, double T, ReplicaStream& rng,
                                       int samples = 1000, double safety = 2.0, const FlowConfig& cfg = {});

}  // namespace semiswitch
