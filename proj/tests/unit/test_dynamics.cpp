#include <doctest.h>

#include <cmath>

#include "semiswitch/dynamics.hpp"
#include "semiswitch/rng.hpp"
#include "semiswitch/scenarios.hpp"

using namespace semiswitch;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

VectorFieldSpec decay() {
  return make_field("decay", 1, [](auto x, auto out) { out[0] = -x[0]; });
}

VectorFieldSpec toward_one() {
  return make_field("toward-one", 1, [](auto x, auto out) { out[0] = 1.0 - x[0]; });
}

VectorFieldSpec logistic(double alpha, double a) {
  return make_field("logistic", 1, [alpha, a](auto x, auto out) { out[0] = alpha * x[0] * (1.0 - a * x[0]); });
}

VectorFieldSpec constant1(double c) { return constant_field("c", v1(c)); }

}  // namespace

TEST_CASE("flow of linear decay halves at ln 2") {
  CHECK(flow(decay(), std::log(2.0), v1(1.0))[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("flow at time zero is the identity") {
  Vec x = v1(0.37);
  CHECK(flow(logistic(1.0, 0.5), 0.0, x)[0] == 0.37);
  CHECK(flow(decay(), 0.0, x)[0] == 0.37);
}

TEST_CASE("logistic flow matches its closed form") {
  // p1 / (1 + (p1/p0 - 1) e^{-t}) with p0 = 1, p1 = 2, t = ln 3
  CHECK(flow(logistic(1.0, 0.5), std::log(3.0), v1(1.0))[0] == doctest::Approx(1.5).epsilon(1e-8));
}

TEST_CASE("composite flow of opposite constant fields cancels") {
  ControlSequence cs{{1.0, 1.0}, {0, 1}};
  auto r = composite_flow({constant1(1.0), constant1(-1.0)}, cs, v1(0.0));
  CHECK(std::abs(r.endpoint[0]) < 1e-12);
}

TEST_CASE("single-leg composite flow equals the flow") {
  ControlSequence cs{{0.8}, {0}};
  auto r = composite_flow({decay(), toward_one()}, cs, v1(0.9));
  CHECK(r.endpoint[0] == doctest::Approx(flow(decay(), 0.8, v1(0.9))[0]).epsilon(1e-12));
}

TEST_CASE("composite flow applies legs in order") {
  ControlSequence cs{{std::log(2.0), std::log(2.0)}, {1, 0}};
  auto r = composite_flow({decay(), toward_one()}, cs, v1(1.0));
  CHECK(r.endpoint[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("jacobian of a linear field is its matrix") {
  Mat A(2, 2);
  A << 0.3, -1.0, 2.0, 0.5;
  auto f = affine_field("A", A, Vec::Zero(2));
  Mat J = jacobian(f, v2(0.4, -0.7));
  CHECK((J - A).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((jacobian_fd(f, v2(0.4, -0.7)) - A).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("jacobian of a nonlinear field matches the hand derivative") {
  auto f = make_field("nl", 2, [](auto x, auto out) {
    out[0] = -x[0] * x[0];
    out[1] = x[1];
  });
  Mat J = jacobian(f, v2(1.5, 2.0));
  CHECK(J(0, 0) == doctest::Approx(-3.0));
  CHECK(J(1, 1) == doctest::Approx(1.0));
  CHECK(J(0, 1) == 0.0);
  CHECK(J(1, 0) == 0.0);
}

TEST_CASE("jacobian of the non-analytic field agrees with finite differences") {
  auto sys = make_builtin("non-analytic").system;
  for (const auto& f : sys.fields) {
    Mat J = jacobian(f, v1(-0.5));
    Mat Jfd = jacobian_fd(f, v1(-0.5));
    CHECK(std::abs(J(0, 0) - Jfd(0, 0)) <= 1e-5 * (1.0 + std::abs(J(0, 0))));
  }
}

TEST_CASE("bracket of constant fields vanishes") {
  auto r = lie_bracket(constant_field("a", v2(1, 2)), constant_field("b", v2(-3, 0.5)), v2(0.1, 0.2));
  CHECK(r.norm() == 0.0);
}

TEST_CASE("bracket of linear fields is the matrix commutator") {
  Mat A(2, 2), B(2, 2);
  A << 0, 1, 0, 0;
  B << 0, 0, 1, 0;
  auto r = lie_bracket(affine_field("A", A, Vec::Zero(2)), affine_field("B", B, Vec::Zero(2)), v2(1, 1));
  CHECK(r[0] == doctest::Approx(-1.0));
  CHECK(r[1] == doctest::Approx(1.0));
}

TEST_CASE("bracket of a field with itself vanishes") {
  auto f = logistic(1.3, 0.7);
  CHECK(lie_bracket(f, f, v1(0.4)).norm() < 1e-12);
}

TEST_CASE("bracket is antisymmetric") {
  auto f = make_field("f", 2, [](auto x, auto out) {
    using std::sin;
    out[0] = sin(x[1]);
    out[1] = x[0] * x[1];
  });
  auto g = make_field("g", 2, [](auto x, auto out) {
    using std::exp;
    out[0] = x[0] * x[0];
    out[1] = exp(-x[0]);
  });
  ReplicaStream rng(5);
  for (int k = 0; k < 50; ++k) {
    Vec x = v2(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
    CHECK((lie_bracket(f, g, x) + lie_bracket(g, f, x)).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("strong bracket ranks") {
  auto na = make_builtin("non-analytic").system;
  CHECK(bracket_rank(na.fields, v1(-0.5), BracketMode::Strong).rank == 1);
  CHECK(bracket_rank({decay(), decay()}, v1(0.3), BracketMode::Strong).rank == 0);
  auto ni = make_builtin("non-irreducible").system;
  for (double a : {0.1, 0.5, 0.9})
    for (double b : {0.2, 0.7}) CHECK(bracket_rank(ni.fields, v2(a, b), BracketMode::Strong).rank == 2);
}

TEST_CASE("submersion jacobian of opposite constant fields") {
  auto r = submersion_jacobian({constant1(1.0), constant1(-1.0)}, v1(0.0), {0, 1}, {0.4}, 1.0);
  CHECK(r.rank == 1);
  CHECK(r.jacobian(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  auto same = submersion_jacobian({constant1(1.0), constant1(1.0)}, v1(0.0), {0, 1}, {0.4}, 1.0);
  CHECK(same.rank == 0);
}

TEST_CASE("flow semigroup property") {
  auto f = make_field("pend", 2, [](auto x, auto out) {
    using std::sin;
    out[0] = x[1];
    out[1] = -sin(x[0]) - 0.1 * x[1];
  });
  ReplicaStream rng(11);
  for (int k = 0; k < 30; ++k) {
    Vec x = v2(4 * rng.uniform() - 2, 4 * rng.uniform() - 2);
    double t = 2 * rng.uniform(), u = 2 * rng.uniform();
    Vec a = flow(f, t + u, x);
    Vec b = flow(f, t, flow(f, u, x));
    CHECK((a - b).norm() <= 1e-6 * (1.0 + x.norm()));
  }
}

TEST_CASE("numeric flow matches closed form") {
  auto f = relaxation_field("r", v1(1.0));
  REQUIRE(static_cast<bool>(f.closed_form_flow));
  auto numeric = make_field("n", 1, [](auto x, auto out) { out[0] = 1.0 - x[0]; });
  for (double t : {0.1, 1.0, 3.0}) {
    double a = f.closed_form_flow(t, v1(0.2))[0];
    double b = flow(numeric, t, v1(0.2))[0];
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(a));
  }
}

TEST_CASE("closed form flow derivative matches the field") {
  auto f = relaxation_field("r", v2(1.0, -2.0));
  ReplicaStream rng(3);
  for (int k = 0; k < 20; ++k) {
    Vec x = v2(rng.uniform(), rng.uniform());
    double t = rng.uniform(), h = 1e-6;
    Vec d = (f.closed_form_flow(t + h, x) - f.closed_form_flow(t - h, x)) / (2 * h);
    CHECK((d - f.rhs(f.closed_form_flow(t, x))).norm() < 1e-6);
  }
}

TEST_CASE("composite flow satisfies the Lipschitz bound") {
  std::vector<VectorFieldSpec> fields{decay(), toward_one()};
  CompactSet M = CompactSet::box(v1(0.0), v1(1.0));
  const double T = 2.0;
  ReplicaStream rng(17);
  auto lc = composite_lipschitz(fields, M, T, rng);
  const double factor = lc.C * std::exp(lc.L * T);
  for (int k = 0; k < 200; ++k) {
    Vec x = v1(rng.uniform()), y = v1(rng.uniform());
    std::vector<double> u(3), v(3);
    double su = 0, sv = 0, l1 = 0;
    for (int j = 0; j < 3; ++j) {
      u[j] = 0.01 + rng.uniform() * (T / 3.0 - 0.01);
      v[j] = 0.01 + rng.uniform() * (T / 3.0 - 0.01);
      su += u[j];
      sv += v[j];
      l1 += std::abs(u[j] - v[j]);
    }
    REQUIRE(su <= T);
    REQUIRE(sv <= T);
    Vec a = composite_flow(fields, ControlSequence{u, {0, 1, 0}}, x).endpoint;
    Vec b = composite_flow(fields, ControlSequence{v, {0, 1, 0}}, y).endpoint;
    CHECK((a - b).norm() <= factor * (l1 + (x - y).norm()) + 1e-12);
  }
}
