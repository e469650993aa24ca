#include <doctest.h>

#include <cmath>

#include "semiswitch/rng.hpp"
#include "semiswitch/stats.hpp"

using namespace semiswitch;

TEST_CASE("Kolmogorov tail values") {
  CHECK(kolmogorov_tail(0.0) == doctest::Approx(1.0));
  CHECK(kolmogorov_tail(1.36) == doctest::Approx(0.0494).epsilon(0.01));
  CHECK(kolmogorov_tail(1.63) == doctest::Approx(0.0098).epsilon(0.02));
  CHECK(kolmogorov_tail(5.0) < 1e-12);
}

TEST_CASE("one-sample test accepts the true law and rejects a wrong one") {
  ReplicaStream rng(1);
  std::vector<double> u(5000);
  for (auto& v : u) v = rng.uniform();
  auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_one_sample(u, cdf).p_value > 0.001);
  auto wrong = [](double x) { return std::clamp(x * x, 0.0, 1.0); };
  CHECK(ks_one_sample(u, wrong).p_value < 1e-6);
}

TEST_CASE("one-sample test handles atoms") {
  ReplicaStream rng(2);
  std::vector<double> s(5000);
  for (auto& v : s) v = rng.uniform() < 0.5 ? 1.0 : 2.0;
  auto cdf = [](double x) { return x < 1.0 ? 0.0 : (x < 2.0 ? 0.5 : 1.0); };
  auto left = [](double x) { return x <= 1.0 ? 0.0 : (x <= 2.0 ? 0.5 : 1.0); };
  CHECK(ks_one_sample(s, cdf, left).p_value > 0.001);
}

TEST_CASE("two-sample test") {
  ReplicaStream rng(3);
  std::vector<double> a(4000), b(4000), c(4000);
  for (auto& v : a) v = rng.uniform();
  for (auto& v : b) v = rng.uniform();
  for (auto& v : c) v = 0.1 + rng.uniform();
  CHECK(ks_two_sample(a, b).p_value > 0.001);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("mean and standard error") {
  auto m = mean_and_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("batch means interval") {
  ReplicaStream rng(4);
  std::vector<double> x(100000);
  double ar = 0.0;
  for (auto& v : x) {
    ar = 0.9 * ar + (rng.uniform() - 0.5);
    v = ar;
  }
  auto b = batch_means(x, 50);
  CHECK(b.batches == 50);
  CHECK(b.lower < b.mean);
  CHECK(b.upper > b.mean);
  CHECK(b.lower < 0.0);
  CHECK(b.upper > 0.0);
  // half-width is the t quantile with 49 degrees of freedom times the standard error
  CHECK((b.upper - b.lower) / 2.0 == doctest::Approx(2.0096 * b.std_error).epsilon(1e-3));
}
