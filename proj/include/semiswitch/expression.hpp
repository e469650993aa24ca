#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semiswitch/dual.hpp"

namespace semiswitch {

// Small arithmetic grammar: + - * / ^, unary minus, numbers, variables and
// exp ln log sin cos sinh cosh sqrt abs min max pow.
class Expression {
 public:
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sin, Cos, Sinh, Cosh, Sqrt, Abs, Min, Max };

  struct Node {
    Op op = Op::Const;
    double value = 0.0;
    int var = 0;
    std::unique_ptr<Node> a, b;
  };

  // Throws ConfigError with the offending column.
  static Expression parse(const std::string& text, const std::vector<std::string>& variables);

  template <class T>
  T eval(std::span<const T> vars) const {
    return eval_node<T>(*root_, vars);
  }
  double operator()(std::span<const double> vars) const { return eval<double>(vars); }
  const std::string& text() const { return text_; }

 private:
  template <class T>
  static T eval_node(const Node& n, std::span<const T> v) {
    using std::abs;
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    switch (n.op) {
      case Op::Const: return T(n.value);
      case Op::Var: return v[static_cast<std::size_t>(n.var)];
      case Op::Neg: return -eval_node<T>(*n.a, v);
      case Op::Add: return eval_node<T>(*n.a, v) + eval_node<T>(*n.b, v);
      case Op::Sub: return eval_node<T>(*n.a, v) - eval_node<T>(*n.b, v);
      case Op::Mul: return eval_node<T>(*n.a, v) * eval_node<T>(*n.b, v);
      case Op::Div: return eval_node<T>(*n.a, v) / eval_node<T>(*n.b, v);
      case Op::Pow:
        if (n.b->op == Op::Const) return pow(eval_node<T>(*n.a, v), n.b->value);
        return pow(eval_node<T>(*n.a, v), eval_node<T>(*n.b, v));
      case Op::Exp: return exp(eval_node<T>(*n.a, v));
      case Op::Log: return log(eval_node<T>(*n.a, v));
      case Op::Sin: return sin(eval_node<T>(*n.a, v));
      case Op::Cos: return cos(eval_node<T>(*n.a, v));
      case Op::Sinh: return sinh(eval_node<T>(*n.a, v));
      case Op::Cosh: return cosh(eval_node<T>(*n.a, v));
      case Op::Sqrt: return sqrt(eval_node<T>(*n.a, v));
      case Op::Abs: return abs(eval_node<T>(*n.a, v));
      case Op::Min: {
        T x = eval_node<T>(*n.a, v), y = eval_node<T>(*n.b, v);
        return primal(x) <= primal(y) ? x : y;
      }
      case Op::Max: {
        T x = eval_node<T>(*n.a, v), y = eval_node<T>(*n.b, v);
        return primal(x) >= primal(y) ? x : y;
      }
    }
    return T(0.0);
  }

  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace semiswitch
