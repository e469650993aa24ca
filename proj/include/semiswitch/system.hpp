#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semiswitch/holding_law.hpp"
#include "semiswitch/rng.hpp"
#include "semiswitch/vector_field.hpp"

namespace semiswitch {

struct RateFunction {
  std::function<double(const Vec&)> eval;
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  std::optional<double> constant;

  static RateFunction constant_rate(double rate);
  double operator()(const Vec& x) const { return constant ? *constant : eval(x); }
};

struct JumpMatrix {
  std::function<Mat(const Vec&)> eval;
  bool globally_irreducible = false;
  std::vector<std::pair<int, int>> witness;

  static JumpMatrix constant(Mat q);
  // Uniform jumps to every other state.
  static JumpMatrix uniform_off_diagonal(int n);
  Mat operator()(const Vec& x) const { return eval(x); }
};

class CompactSet {
 public:
  enum class Kind { Box, Ball };
  static CompactSet box(Vec lo, Vec hi);
  static CompactSet ball(Vec center, double radius);

  Kind kind() const { return kind_; }
  bool contains(const Vec& x, double tol = 1e-9) const;
  // Axis-aligned bounding box.
  Vec lower() const;
  Vec upper() const;
  Vec sample(ReplicaStream& rng) const;
  CompactSet enlarged(double margin) const;
  int dim() const { return static_cast<int>(a_.size()); }
  const Vec& center() const { return a_; }
  double radius() const { return r_; }

 private:
  Kind kind_ = Kind::Box;
  Vec a_, b_;
  double r_ = 0.0;
};

struct HybridState {
  Vec x;
  double s = 0.0;
  int i = 0;
};

struct SwitchedSystem {
  std::string name;
  int dim = 1;
  std::vector<VectorFieldSpec> fields;
  std::vector<HoldingLaw> laws;
  std::vector<RateFunction> rates;
  JumpMatrix jump;
  std::optional<CompactSet> compact;
  FlowConfig flow_config;

  int states() const { return static_cast<int>(fields.size()); }
  double lambda_min() const;
  double lambda_max() const;
  bool constant_rates() const;
  // Structural checks plus spot checks of rates and Q on sample points.
  void validate() const;
};

}  // namespace semiswitch
