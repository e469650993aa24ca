#pragma once

#include <functional>
#include <vector>

#include "semiswitch/vector_field.hpp"

namespace semiswitch {

using Rhs = std::function<Vec(const Vec&)>;

// Continuous extension of one accepted step: y(t0 + theta h) for theta in [0,1].
struct StepInterpolant {
  double t0 = 0.0;
  double h = 0.0;
  Mat coeff;  // columns r1..r5

  Vec at_theta(double theta) const;
  Vec at(double t) const { return at_theta(h > 0.0 ? (t - t0) / h : 0.0); }
  double component_at(int c, double theta) const;
};

// Dense solution over [0, duration].
class DenseSolution {
 public:
  void push(StepInterpolant step) { steps_.push_back(std::move(step)); }
  Vec at(double t) const;
  double duration() const { return steps_.empty() ? 0.0 : steps_.back().t0 + steps_.back().h; }
  const std::vector<StepInterpolant>& steps() const { return steps_; }
  Vec initial;

 private:
  std::vector<StepInterpolant> steps_;
};

struct LevelCrossing {
  bool found = false;
  double time = 0.0;
  Vec state;
};

// Autonomous integration of x' = f(x) forward over `duration` >= 0.
Vec integrate(const Rhs& f, const Vec& x0, double duration, const FlowConfig& cfg);

DenseSolution integrate_dense(const Rhs& f, const Vec& x0, double duration, const FlowConfig& cfg);

// Values at the sorted times in [0, duration], obtained from one pass.
std::vector<Vec> integrate_at(const Rhs& f, const Vec& x0, const std::vector<double>& times,
                              const FlowConfig& cfg);

// First time at which component `c` (nondecreasing along solutions) reaches `level`.
LevelCrossing integrate_until(const Rhs& f, const Vec& x0, int c, double level,
                              double max_duration, const FlowConfig& cfg);

}  // namespace semiswitch
