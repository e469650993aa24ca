#include "semiswitch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <boost/math/distributions/students_t.hpp>

#include "semiswitch/errors.hpp"

namespace semiswitch {

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf,
                       const std::function<double(double)>& cdf_left) {
  if (sample.empty()) throw InvalidArgument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  std::size_t k = 0;
  while (k < sample.size()) {
    std::size_t j = k;
    while (j < sample.size() && sample[j] == sample[k]) ++j;
    double v = sample[k];
    double below = static_cast<double>(k) / n;
    double upto = static_cast<double>(j) / n;
    double f = cdf(v);
    double fl = cdf_left ? cdf_left(v) : f;
    d = std::max({d, std::abs(upto - f), std::abs(below - fl)});
    k = j;
  }
  double sn = std::sqrt(n);
  return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

MeanSe mean_and_se(const std::vector<double>& v) {
  if (v.empty()) return {};
  double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

BatchMeans batch_means(const std::vector<double>& series, std::size_t batches, double level) {
  if (batches < 2 || series.size() < batches) throw InvalidArgument("not enough data for batch means");
  std::size_t len = series.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = b * len; k < (b + 1) * len; ++k) s += series[k];
    means[b] = s / static_cast<double>(len);
  }
  MeanSe ms = mean_and_se(means);
  boost::math::students_t dist(static_cast<double>(batches - 1));
  double tq = boost::math::quantile(dist, 0.5 + 0.5 * level);
  return {ms.mean, ms.std_error, ms.mean - tq * ms.std_error, ms.mean + tq * ms.std_error, batches};
}

}  // namespace semiswitch
