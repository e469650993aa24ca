#include <doctest.h>

#include <cmath>

#include "semiswitch/errors.hpp"
#include "semiswitch/ergodicity.hpp"
#include "semiswitch/process.hpp"
#include "semiswitch/scenarios.hpp"
#include "semiswitch/stats.hpp"

using namespace semiswitch;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

HybridState at(double x, double s, int i) { return HybridState{v1(x), s, i}; }

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}

SwitchedSystem constant_pair(const HoldingLaw& law) {
  SwitchedSystem s = relaxation_pair(law, law);
  s.fields = {constant_field("up", v1(1.0)), constant_field("down", v1(-1.0))};
  s.compact.reset();
  return s;
}

}  // namespace

TEST_CASE("Lyapunov function vanishes at zero delay") {
  auto sys = exponential_flip(1.0);
  auto p = LyapunovParams::from_system(sys, 0.5);
  CHECK(lyapunov_f(sys, at(0.4, 0.0, 0), p) == doctest::Approx(0.0));
}

TEST_CASE("Lyapunov closed form for exponential laws") {
  auto sys = exponential_flip(1.0);
  auto p = LyapunovParams::from_system(sys, 0.5);
  CHECK(p.gamma() == doctest::Approx(0.5));
  CHECK(std::abs(lyapunov_f(sys, at(0.4, 2.0, 0), p) - (std::exp(1.0) - 1.0)) < 1e-9);
  ReplicaStream rng(12);
  Estimate mc = lyapunov_f_mc(sys, at(0.4, 2.0, 1), p, 200000, rng);
  CHECK(std::abs(mc.value - (std::exp(1.0) - 1.0)) <= 3.0 * mc.std_error);
}

TEST_CASE("Lyapunov function is nonnegative and increasing in the delay") {
  auto sys = exponential_flip(1.0);
  auto p = LyapunovParams::from_system(sys, 0.5);
  double prev = -1.0;
  for (int k = 0; k <= 40; ++k) {
    double f = lyapunov_f(sys, at(0.5, 0.1 * k, 1), p);
    CHECK(f >= 0.0);
    CHECK(f > prev);
    prev = f;
  }
  auto km = make_builtin("km-example").system;
  auto q = LyapunovParams::from_system(km, 0.5);
  ReplicaStream rng(3);
  for (int k = 0; k < 200; ++k) {
    HybridState z = at(rng.uniform(), 0.0, k % 2);
    z.s = rng.uniform() * std::min(1.9, -std::log(std::abs(z.i - z.x[0])));
    if (!in_K_M(km, z)) continue;
    CHECK(lyapunov_f(km, z, q) >= 0.0);
  }
}

TEST_CASE("drift inequality") {
  auto sys = exponential_flip(1.0);
  auto p = LyapunovParams::from_system(sys, 0.5);
  auto d = drift_check(sys, at(0.3, 2.0, 1), 1.0, p, 4000, 5);
  CHECK(d.bound == doctest::Approx(std::exp(-0.5) * (std::exp(1.0) - 1.0) + 1.0).epsilon(1e-6));
  CHECK(d.pass);
  CHECK(d.estimate < d.bound);
  auto d0 = drift_check(sys, at(0.3, 2.0, 1), 0.0, p, 100, 5);
  CHECK(d0.estimate == doctest::Approx(d0.f0));
  auto km = make_builtin("km-example").system;
  auto q = LyapunovParams::from_system(km, 0.5);
  for (double t : {0.5, 1.0, 2.0}) CHECK(drift_check(km, at(0.5, 0.3, 0), t, q, 4000, 9).pass);
}

TEST_CASE("decay constants that the laws violate are rejected") {
  auto sys = exponential_flip(1.0);
  auto p = LyapunovParams::from_system(sys, 0.5);
  CHECK_NOTHROW(p.validate(sys));
  p.beta = 5.0;
  CHECK_THROWS_AS(p.validate(sys), NoExpDecay);
  p.beta = 1.0;
  p.delta = 1.5;
  CHECK_THROWS_AS(p.validate(sys), NoExpDecay);
}

TEST_CASE("semigroup iteration conserves constants and starts from the input") {
  auto sys = exponential_flip(1.0);
  auto one = GridFunction1D::tabulate(linspace(0, 1, 41), linspace(0, 4, 21), 2, [](double, double, int) { return 1.0; });
  auto r = semigroup_iterate(sys, one, 1.0, 5);
  for (double v : r.value.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  auto f = GridFunction1D::tabulate(linspace(0, 1, 41), linspace(0, 4, 21), 2,
                                    [](double x, double s, int i) { return x + 0.1 * s + i; });
  auto r0 = semigroup_iterate(sys, f, 1.0, 0);
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(r0.value.values[k] == f.values[k]);
}

TEST_CASE("semigroup iteration reproduces the telegraph occupancy") {
  auto sys = exponential_flip(1.0);
  auto f = GridFunction1D::tabulate(linspace(0, 1, 101), linspace(0, 4, 41), 2,
                                    [](double, double, int i) { return static_cast<double>(i); });
  const double t = 1.0;
  auto r = semigroup_iterate(sys, f, t, 20);
  for (int i = 0; i < 2; ++i) {
    double oracle = 0.5 * (1.0 - std::exp(-2.0 * t) * (1.0 - 2.0 * i));
    for (double x : {0.1, 0.5, 0.9}) CHECK(std::abs(r.value.interpolate(x, 0.7, i) - oracle) < 2e-3);
  }
  for (std::size_t k = 1; k < r.increments.size(); ++k) CHECK(r.increments[k] <= r.tail_bounds[k] + 1e-6);
}

TEST_CASE("semigroup iteration rejects atoms") {
  auto sys = make_builtin("feller-dirac").system;
  auto f = GridFunction1D::tabulate(linspace(0, 1, 11), linspace(0, 2, 11), 2, [](double, double, int) { return 1.0; });
  CHECK_THROWS_AS(semigroup_iterate(sys, f, 1.0, 2), DiscontinuousLaw);
}

TEST_CASE("resolvent sampling") {
  auto frozen = relaxation_pair(HoldingLaw::dirac(1e6), HoldingLaw::dirac(1e6));
  frozen.fields = {constant_field("z", v1(0.0)), constant_field("z", v1(0.0))};
  ReplicaStream rng(1);
  for (int k = 0; k < 100; ++k) CHECK(resolvent_sample(frozen, at(0.25, 0.0, 0), rng).x[0] == 0.25);

  auto sys = exponential_flip(1.0);
  ReplicaStream a(77), b(77);
  auto za = resolvent_sample(sys, at(0.3, 0.0, 0), a);
  auto zb = resolvent_sample(sys, at(0.3, 0.0, 0), b);
  CHECK(za.x[0] == zb.x[0]);
  CHECK(za.s == zb.s);
  CHECK(za.i == zb.i);

  // with an Exp(1) horizon and unit-rate renewals from delay zero, the delay is min of two Exp(1) variables
  ReplicaStream rng2(5);
  std::vector<double> tau;
  for (int k = 0; k < 20000; ++k) tau.push_back(resolvent_sample(sys, at(0.3, 0.0, 0), rng2).s);
  auto m = mean_and_se(tau);
  CHECK(std::abs(m.mean - 0.5) <= 3.0 * m.std_error);
}

TEST_CASE("regularity probe examples") {
  auto r = regularity_probe(HoldingLaw::uniform(0, 2), 1.0, 0.1);
  CHECK(r.regular);
  CHECK(r.lower_bound == doctest::Approx(0.5));
  CHECK_THROWS_AS(regularity_probe(HoldingLaw::atoms({{1.0, 0.5}, {2.0, 0.5}}), 1.0, 0.1), NoDensity);
  auto out = regularity_probe(HoldingLaw::uniform(1, 2), 0.5, 0.1);
  CHECK_FALSE(out.regular);
  CHECK(out.lower_bound == 0.0);
}

TEST_CASE("submersion certificate examples") {
  ControlSequence cs{{0.5, 0.5, 0.5}, {0, 1, 0}};
  auto ok = submersion_certificate(constant_pair(HoldingLaw::uniform(0, 2)), at(0.0, 0.0, 0), cs, 1.0);
  CHECK(ok.admissible);
  CHECK(ok.full_rank);
  CHECK(ok.regular);
  CHECK(ok.all());

  ControlSequence dcs{{1.0, 1.0, 1.0}, {0, 1, 0}};
  auto dirac = submersion_certificate(constant_pair(HoldingLaw::dirac(1.0)), at(0.0, 0.0, 0), dcs, 2.0);
  CHECK_FALSE(dirac.regular);

  auto same = constant_pair(HoldingLaw::uniform(0, 2));
  same.fields[1] = same.fields[0];
  auto flat = submersion_certificate(same, at(0.0, 0.0, 0), cs, 1.0);
  CHECK_FALSE(flat.full_rank);
  CHECK_FALSE(flat.all());
}
