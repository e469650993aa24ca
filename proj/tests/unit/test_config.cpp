#include <doctest.h>

#include <cmath>
#include <string>

#include "semiswitch/config.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/expression.hpp"
#include "semiswitch/switching.hpp"

using namespace semiswitch;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kSystem = R"({
  "system": {
    "dim": 1,
    "fields": [{"expr": ["-x"]}, {"expr": ["1 - x1"]}],
    "laws": [{"kind": "exponential", "rate": 1}, {"kind": "uniform", "a": 0, "b": 2}],
    "jump": {"flip": true},
    "compact": {"box": {"lo": [0], "hi": [1]}}
  },
  "start": {"x": [0.5], "s": 0.25, "i": 1},
  "experiment": {"kind": "simulate"},
  "run": {"seed": 9, "t_end": 3, "replicas": 4}
})";

}  // namespace

TEST_CASE("expression evaluation") {
  auto e = Expression::parse("2*x^2 - sin(y) + exp(0) / 4", {"x", "y"});
  std::vector<double> v{1.5, 0.3};
  CHECK(e(v) == doctest::Approx(2 * 2.25 - std::sin(0.3) + 0.25));
  auto f = Expression::parse("-x^2", {"x"});
  std::vector<double> w{3.0};
  CHECK(f(w) == doctest::Approx(-9.0));
  auto g = Expression::parse("2^3^2", {});
  CHECK(g(std::vector<double>{}) == doctest::Approx(512.0));
  auto h = Expression::parse("max(x, 2) * pi + ln(e) + cosh(0) + sinh(0) + sqrt(4) + abs(-1) + pow(2, 3)", {"x"});
  CHECK(h(w) == doctest::Approx(3 * M_PI + 1 + 1 + 0 + 2 + 1 + 8));
}

TEST_CASE("expression aliases") {
  auto e = Expression::parse("x1 + x", {"x1|x"});
  CHECK(e(std::vector<double>{2.0}) == doctest::Approx(4.0));
}

TEST_CASE("expression errors carry a column") {
  CHECK_THROWS_WITH_AS(Expression::parse("1 + * 2", {"x"}), doctest::Contains("column"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("q + 1", {"x"}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("sin(x", {"x"}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("foo(x)", {"x"}), ConfigError);
}

TEST_CASE("custom system config") {
  auto cfg = parse_config(kSystem);
  CHECK(cfg.scenario.system.dim == 1);
  CHECK(cfg.scenario.system.states() == 2);
  CHECK(cfg.scenario.start.s == 0.25);
  CHECK(cfg.scenario.start.i == 1);
  CHECK(cfg.experiment == "simulate");
  CHECK(cfg.run.seed == 9);
  CHECK(*cfg.run.t_end == 3.0);
  CHECK(*cfg.run.replicas == 4);
  CHECK(cfg.scenario.system.fields[1].rhs(Vec::Constant(1, 0.25))[0] == doctest::Approx(0.75));
  HybridState z{Vec::Constant(1, 0.5), 0.5, 1};
  CHECK(survival(cfg.scenario.system, z, 0.5) == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("builtin config with overrides") {
  auto cfg = parse_config(R"({"builtin": "km-example", "experiment": "km-boundary", "run": {"seed": 3}})");
  CHECK(cfg.experiment == "km-boundary");
  CHECK(cfg.run.seed == 3);
  auto na = parse_config(R"({"builtin": "non-analytic", "experiment": {"kind": "certify-submersion", "T": 2.4}})");
  CHECK(na.params.contains("sequence"));
  CHECK(builtin_config("lv-dwell").lv.has_value());
}

TEST_CASE("config errors name the offending location") {
  CHECK(error_of("{\n  \"builtin\": \"km-example\",,\n}").find("line 2") != std::string::npos);
  CHECK(error_of(R"({"builtin": "nope"})").find("/builtin") != std::string::npos);
  CHECK(error_of(R"({"builtin": "km-example", "experiment": "fly"})").find("/experiment") != std::string::npos);
  CHECK(error_of(R"({"builtin": "km-example", "start": {"x": [0.5], "i": 4}})").find("/start/i") != std::string::npos);
  CHECK(error_of(R"({"builtin": "km-example", "run": {"seed": "x"}})").find("/run/seed") != std::string::npos);
  std::string sys = kSystem;
  auto swap = [&](const std::string& from, const std::string& to) {
    std::string s = sys;
    s.replace(s.find(from), from.size(), to);
    return error_of(s);
  };
  CHECK(swap("\"kind\": \"uniform\"", "\"kind\": \"gamma\"").find("/laws/1/kind") != std::string::npos);
  CHECK(swap("\"1 - x1\"", "\"1 - w\"").find("/fields/1/expr/0") != std::string::npos);
  CHECK(swap("\"dim\": 1", "\"dim\": 2").find("/fields/0/expr") != std::string::npos);
  CHECK(swap("\"jump\": {\"flip\": true}", "\"jump\": {}").find("/jump") != std::string::npos);
  CHECK(swap("\"a\": 0, \"b\": 2", "\"a\": 3, \"b\": 2").find("/laws/1") != std::string::npos);
  CHECK(error_of("[1, 2]").find("JSON object") != std::string::npos);
}
