#include <doctest.h>

#include <cmath>

#include "semiswitch/accessibility.hpp"
#include "semiswitch/dynamics.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/process.hpp"
#include "semiswitch/scenarios.hpp"

using namespace semiswitch;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

HybridState at(double x, double s, int i) { return HybridState{v1(x), s, i}; }

SwitchedSystem drift_line() {
  SwitchedSystem s = exponential_flip(1.0);
  s.fields = {constant_field("right", v1(1.0)), constant_field("left", v1(-1.0))};
  s.compact.reset();
  return s;
}

VectorFieldSpec decay() { return make_field("decay", 1, [](auto x, auto out) { out[0] = -x[0]; }); }

VectorFieldSpec toward_one() { return make_field("toward-one", 1, [](auto x, auto out) { out[0] = 1.0 - x[0]; }); }

}  // namespace

TEST_CASE("exponential laws admit any sequence starting in the current state") {
  auto sys = make_builtin("inflation").system;
  sys.laws = {HoldingLaw::exponential(1.0), HoldingLaw::exponential(1.0)};
  ControlSequence cs{{0.3, 1.2, 0.4, 2.0}, {0, 1, 0, 1}};
  CHECK(is_admissible(sys, at(0.1, 0.0, 0), cs).verdict);
  CHECK(is_admissible(sys, at(0.1, 0.7, 0), cs).verdict);
  auto wrong = is_admissible(sys, at(0.1, 0.0, 1), cs);
  CHECK_FALSE(wrong.verdict);
  CHECK(wrong.failing_condition == AdmissibilityFailure::FirstTimeSupport);
}

TEST_CASE("Dirac laws reject times off the atom") {
  auto sys = relaxation_pair(HoldingLaw::dirac(1.0), HoldingLaw::dirac(1.0));
  auto r = is_admissible(sys, at(0.5, 0.0, 0), ControlSequence{{0.5, 1.0}, {0, 1}});
  CHECK_FALSE(r.verdict);
  CHECK(r.failing_condition == AdmissibilityFailure::FirstTimeSupport);
  auto tail = is_admissible(sys, at(0.5, 0.0, 0), ControlSequence{{1.0, 1.0}, {0, 1}});
  CHECK_FALSE(tail.verdict);
  CHECK(tail.failing_condition == AdmissibilityFailure::TailCondition);
  CHECK(is_admissible(sys, at(0.5, 0.0, 0), ControlSequence{{1.0, 0.5}, {0, 1}}).verdict);
  auto mid = is_admissible(sys, at(0.5, 0.0, 0), ControlSequence{{1.0, 0.5, 0.5}, {0, 1, 0}});
  CHECK_FALSE(mid.verdict);
  CHECK(mid.failing_condition == AdmissibilityFailure::InteriorTimeSupport);
}

TEST_CASE("malformed sequences are reported") {
  auto sys = exponential_flip(1.0);
  auto r = is_admissible(sys, at(0.5, 0.0, 0), ControlSequence{{1.0}, {0, 1}});
  CHECK_FALSE(r.verdict);
  CHECK(r.failing_condition == AdmissibilityFailure::Malformed);
}

TEST_CASE("endpoint of an admissible sequence") {
  auto sys = exponential_flip(1.0);
  auto z = reach_endpoint(sys, at(0.8, 0.0, 0), ControlSequence{{0.7}, {0}});
  CHECK(z.x[0] == doctest::Approx(0.8 * std::exp(-0.7)));
  CHECK(z.s == doctest::Approx(0.7));
  CHECK(z.i == 0);
  auto line = drift_line();
  auto w = reach_endpoint(line, at(0.0, 0.0, 0), ControlSequence{{0.5, 0.2}, {0, 1}});
  CHECK(w.x[0] == doctest::Approx(0.3));
  CHECK(w.s == doctest::Approx(0.2));
  CHECK(w.i == 1);
  CHECK(in_K(line, w));
  auto dirac = relaxation_pair(HoldingLaw::dirac(1.0), HoldingLaw::dirac(1.0));
  CHECK_THROWS_AS(reach_endpoint(dirac, at(0.5, 0.0, 0), ControlSequence{{0.5, 0.5}, {0, 1}}), NotAdmissible);
}

TEST_CASE("witness paths follow positive entries") {
  Mat q(3, 3);
  q << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK(witness_path(q, 0, 1).empty());
  auto p = witness_path(q, 0, 2);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == 1);
  CHECK(witness_path(q, 1, 0) == std::vector<int>{2});
}

TEST_CASE("algorithm 1 reaches a constant-drift target") {
  auto sys = drift_line();
  auto r = algorithm1(sys, v1(0.0), ControlSequence{{1.0}, {0}}, 0.01);
  CHECK(r.error <= 0.01);
  CHECK(std::abs(r.endpoint[0] - 1.0) <= 0.01);
  CHECK(is_admissible(sys, at(0.0, 0.0, 0), r.sequence).verdict);
  auto z = reach_endpoint(sys, at(0.0, 0.0, 0), r.sequence);
  CHECK(std::abs(z.x[0] - 1.0) <= 0.01);
}

TEST_CASE("algorithm 1 output is admissible on randomized targets") {
  auto sys = constant_drift_plane();
  ReplicaStream rng(44);
  for (int k = 0; k < 10; ++k) {
    Vec x(2);
    x << rng.uniform() - 0.5, rng.uniform() - 0.5;
    ControlSequence target;
    int legs = 1 + k % 3;
    int state = static_cast<int>(rng() % 3);
    for (int l = 0; l < legs; ++l) {
      target.times.push_back(0.1 + 0.4 * rng.uniform());
      target.indices.push_back(state);
      state = (state + 1 + static_cast<int>(rng() % 2)) % 3;
    }
    auto r = algorithm1(sys, x, target, 0.02);
    HybridState z{x, 0.0, target.indices.front()};
    CHECK(is_admissible(sys, z, r.sequence).verdict);
    CHECK(r.error <= 0.02);
    CHECK((reach_endpoint(sys, z, r.sequence).x - r.target).norm() <= 0.02);
    for (std::size_t l = 0; l < r.iterations.size(); ++l) CHECK(r.iterations[l] <= 10 * r.step_bounds[l]);
  }
}

TEST_CASE("algorithm 1 with a huge tolerance") {
  auto sys = drift_line();
  auto r = algorithm1(sys, v1(0.0), ControlSequence{{0.5, 0.5}, {0, 1}}, 100.0);
  CHECK(r.error <= 100.0);
  CHECK(is_admissible(sys, at(0.0, 0.0, 0), r.sequence).verdict);
}

TEST_CASE("one-dimensional fixed point") {
  const double t = std::log(2.0);
  auto r = fixed_point_1d(decay(), toward_one(), t, t, 0.5, 1e-13);
  CHECK(std::abs(r.x - 1.0 / 3.0) < 1e-10);
  CHECK(r.contraction <= std::exp(-2.0 * t) + 1e-6);
  auto s = fixed_point_1d(decay(), toward_one(), 0.3, 0.9, 0.5, 1e-13);
  double a = std::exp(-0.3), b = std::exp(-0.9);
  CHECK(s.x == doctest::Approx(a * (1.0 - b) / (1.0 - a * b)).epsilon(1e-10));
  CHECK(s.x > 0.0);
  CHECK(s.x < 1.0);
}

TEST_CASE("fixed-point iterates approach monotonically") {
  const double t = std::log(2.0);
  for (double x0 : {0.0, 0.2, 0.9, 1.0}) {
    auto r = fixed_point_1d(decay(), toward_one(), t, t, x0, 1e-13);
    for (std::size_t k = 1; k < r.iterates.size(); ++k)
      CHECK(std::abs(r.iterates[k] - r.x) <= std::abs(r.iterates[k - 1] - r.x) + 1e-15);
  }
}

TEST_CASE("accessible point of the inflation reduction") {
  auto sys = make_builtin("inflation").system;
  auto c = one_d_accessible_point(sys, 1, 0, 0.8, 0.8);
  Vec x = c.z.x;
  CHECK(std::abs((sys.fields[0].rhs(x) - sys.fields[1].rhs(x))[0]) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(is_admissible(sys, c.z, c.sequence).verdict);
}

TEST_CASE("Dirac laws at the chosen times are accepted") {
  auto sys = relaxation_pair(HoldingLaw::dirac(1.0), HoldingLaw::dirac(1.0));
  auto c = one_d_accessible_point(sys, 0, 1, 1.0, 1.0);
  CHECK(c.fixed_point.x == doctest::Approx(std::exp(-1.0) * (1.0 - std::exp(-1.0)) / (1.0 - std::exp(-2.0))));
  CHECK(is_admissible(sys, c.z, c.sequence).verdict);
}
