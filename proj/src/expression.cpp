#include "semiswitch/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <map>

#include "semiswitch/errors.hpp"

namespace semiswitch {

namespace {

using Node = Expression::Node;
using Op = Expression::Op;
using Ptr = std::unique_ptr<Node>;

Ptr make(Op op, Ptr a = nullptr, Ptr b = nullptr) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  Ptr run() {
    Ptr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + s_ + "' column " + std::to_string(pos_ + 1) + ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Ptr sum() {
    Ptr l = product();
    for (;;) {
      if (accept('+')) l = make(Op::Add, std::move(l), product());
      else if (accept('-')) l = make(Op::Sub, std::move(l), product());
      else return l;
    }
  }
  Ptr product() {
    Ptr l = unary();
    for (;;) {
      if (accept('*')) l = make(Op::Mul, std::move(l), unary());
      else if (accept('/')) l = make(Op::Div, std::move(l), unary());
      else return l;
    }
  }
  Ptr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }
  Ptr power() {
    Ptr base = atom();
    if (accept('^')) return make(Op::Pow, std::move(base), unary());
    return base;
  }
  Ptr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (accept('(')) {
      Ptr e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = make(Op::Const);
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      for (std::size_t k = 0; k < vars_.size(); ++k)
        if (matches(vars_[k], name)) {
          auto n = make(Op::Var);
          n->var = static_cast<int>(k);
          return n;
        }
      static const std::map<std::string, Op> unary_fns = {
          {"exp", Op::Exp},   {"ln", Op::Log},     {"log", Op::Log},   {"sin", Op::Sin}, {"cos", Op::Cos},
          {"sinh", Op::Sinh}, {"cosh", Op::Cosh},  {"sqrt", Op::Sqrt}, {"abs", Op::Abs}};
      static const std::map<std::string, Op> binary_fns = {{"min", Op::Min}, {"max", Op::Max}, {"pow", Op::Pow}};
      if (name == "pi" || name == "e") {
        auto n = make(Op::Const);
        n->value = name == "pi" ? 3.14159265358979323846 : 2.71828182845904523536;
        return n;
      }
      if (auto it = unary_fns.find(name); it != unary_fns.end()) {
        expect('(');
        Ptr a = sum();
        expect(')');
        return make(it->second, std::move(a));
      }
      if (auto it = binary_fns.find(name); it != binary_fns.end()) {
        expect('(');
        Ptr a = sum();
        expect(',');
        Ptr b = sum();
        expect(')');
        return make(it->second, std::move(a), std::move(b));
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  // Variable specs may list aliases separated by '|'.
  static bool matches(const std::string& spec, const std::string& name) {
    std::size_t start = 0;
    for (;;) {
      std::size_t bar = spec.find('|', start);
      if (spec.compare(start, bar == std::string::npos ? std::string::npos : bar - start, name) == 0) return true;
      if (bar == std::string::npos) return false;
      start = bar + 1;
    }
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text, variables).run();
  return e;
}

}  // namespace semiswitch
