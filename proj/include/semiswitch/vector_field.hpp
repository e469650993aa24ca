#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semiswitch/dual.hpp"

namespace semiswitch {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

// Deepest dual nesting available to exact bracket evaluation.
inline constexpr int kMaxJetDepth = 4;

template <class T>
using JetFn = std::function<void(std::span<const T>, std::span<T>)>;

// Evaluators of one field over double and nested dual scalars.
struct FieldJets {
  JetFn<double> f0;
  JetFn<D1> f1;
  JetFn<D2> f2;
  JetFn<D3> f3;
  JetFn<D4> f4;

  template <class T>
  const JetFn<T>& get() const {
    if constexpr (std::is_same_v<T, double>) return f0;
    else if constexpr (std::is_same_v<T, D1>) return f1;
    else if constexpr (std::is_same_v<T, D2>) return f2;
    else if constexpr (std::is_same_v<T, D3>) return f3;
    else return f4;
  }
};

struct VectorFieldSpec {
  std::string label;
  int dim = 1;
  std::function<Vec(const Vec&)> rhs;
  std::shared_ptr<const FieldJets> jets;
  std::function<Vec(double, const Vec&)> closed_form_flow;
  // Closed form is trusted for t at or above this value.
  double closed_form_min_t = 0.0;
  std::function<Mat(const Vec&)> jacobian;
  bool analytic = false;
  // Maximal backward time s^i(x); absent means unbounded.
  std::function<double(const Vec&)> backward_horizon;

  Vec operator()(const Vec& x) const { return rhs(x); }
  double horizon(const Vec& x) const {
    return backward_horizon ? backward_horizon(x) : std::numeric_limits<double>::infinity();
  }
};

// Builds a field from a generic callable `f(std::span<const T> x, std::span<T> out)`.
template <class Fn>
VectorFieldSpec make_field(std::string label, int dim, Fn f) {
  auto jets = std::make_shared<FieldJets>();
  jets->f0 = f;
  jets->f1 = f;
  jets->f2 = f;
  jets->f3 = f;
  jets->f4 = f;
  VectorFieldSpec spec;
  spec.label = std::move(label);
  spec.dim = dim;
  spec.rhs = [f, dim](const Vec& x) {
    Vec out(dim);
    f(std::span<const double>(x.data(), static_cast<size_t>(dim)),
      std::span<double>(out.data(), static_cast<size_t>(dim)));
    return out;
  };
  spec.jets = std::move(jets);
  return spec;
}

struct FlowConfig {
  enum class Kind { Rk4, Adaptive };
  Kind kind = Kind::Adaptive;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  // Nonpositive means horizon/100.
  double max_step = 0.0;
  long max_steps = 5'000'000;

  void validate() const;
  double step_cap(double horizon) const {
    return max_step > 0.0 ? max_step : std::max(horizon / 100.0, 1e-300);
  }
};

struct ControlSequence {
  std::vector<double> times;
  std::vector<int> indices;

  size_t size() const { return times.size(); }
  double total_time() const;
  void validate() const;
};

}  // namespace semiswitch
