#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace semiswitch {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

// One-sample test against a CDF; cdf_left(v) = P(X < v) handles atoms (defaults to cdf).
KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf,
                       const std::function<double(double)>& cdf_left = nullptr);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& v);

struct BatchMeans {
  double mean = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t batches = 0;
};

// Batch-means confidence interval at the given two-sided level.
BatchMeans batch_means(const std::vector<double>& series, std::size_t batches = 50, double level = 0.95);

}  // namespace semiswitch
