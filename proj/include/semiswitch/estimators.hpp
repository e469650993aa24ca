#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semiswitch/process.hpp"
#include "semiswitch/system.hpp"

namespace semiswitch {

struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 1;

  int bin_of(double v) const;  // clamped into [0, bins)
  double edge(int k) const { return lo + (hi - lo) * k / bins; }
  bool operator==(const AxisSpec&) const = default;
};

struct HistogramAxes {
  std::vector<AxisSpec> x;
  AxisSpec tau;
  int states = 1;

  bool operator==(const HistogramAxes&) const = default;
  std::size_t cells() const;
  // Per-coordinate bins over M, delay bins up to the 0.999 quantile of the slowest law.
  static HistogramAxes defaults(const SwitchedSystem& sys, int x_bins = 64, int tau_bins = 32);
};

class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(HistogramAxes axes);

  void add(const Vec& x, double tau, int i, double weight = 1.0);
  void merge(const Histogram& other);
  double total() const { return total_; }
  const HistogramAxes& axes() const { return axes_; }
  const std::vector<double>& counts() const { return counts_; }
  std::vector<double> normalized() const;
  std::size_t index(const Vec& x, double tau, int i) const;
  // Marginal mass on the discrete axis.
  std::vector<double> state_marginal() const;
  std::vector<double> tau_marginal() const;
  std::vector<double> x_marginal(int coord) const;

  void write_csv(std::ostream& os) const;
  std::string to_json() const;

 private:
  HistogramAxes axes_;
  std::vector<double> counts_;
  double total_ = 0.0;
};

double tv_distance(const Histogram& a, const Histogram& b);

enum class OccupationMode { SingleTrajectory, Replicas };

struct OccupationOptions {
  OccupationMode mode = OccupationMode::SingleTrajectory;
  double dt = 0.01;
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Time-average histogram of (X, tau, I) on the grid burn_in < t <= T.
Histogram occupation_measure(const SwitchedSystem& sys, const HybridState& z0, double T, double burn_in,
                             const HistogramAxes& axes, const OccupationOptions& opt = {});

struct TvPoint {
  double t = 0.0;
  double tv = 0.0;
  // Expected TV between two independent samples of the pooled law at these sizes.
  double noise = 0.0;
};

std::vector<TvPoint> convergence_diagnostic(const SwitchedSystem& sys, const HybridState& za,
                                            const HybridState& zb, const std::vector<double>& times,
                                            std::size_t replicas, std::uint64_t seed, int threads,
                                            const std::optional<HistogramAxes>& axes = std::nullopt);

// At most `allowed` increases, each within 3 noise units.
bool monotone_within_noise(const std::vector<TvPoint>& series, int allowed = 1);

struct LVParams {
  double alpha[2] = {1.0, 1.0};
  double beta[2] = {1.0, 1.0};
  double a[2] = {1.0, 0.5};
  double b[2] = {0.5, 0.5};
  double c[2] = {2.0, 1.0};
  double d[2] = {1.0, 1.0};

  double p(int i) const { return 1.0 / a[i]; }
  double q1() const { return 1.0 / c[1]; }
  // Positivity, p0 < p1, and the dominance inequalities when requested.
  void validate(bool dominance = false) const;
};

// Resident dynamics on the extinction face with the two laws, flip jumps and unit rates.
SwitchedSystem lv_extinction_system(const LVParams& p, const HoldingLaw& law0, const HoldingLaw& law1);

struct InvasionEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> excursion_integrals;  // completed stays in environment 1
  std::size_t jumps = 0;
};

InvasionEstimate invasion_rate(const LVParams& p, const HoldingLaw& law0, const HoldingLaw& law1, double T,
                               std::uint64_t seed, const HybridState& z0, std::size_t batches = 50);

double delta1(const LVParams& p);
double excursion_integral_bound(const LVParams& p, double T);
// Integral of beta_1 (1 - c_1 x) along the environment-1 flow from x over [0, T].
double excursion_integral(const LVParams& p, double x, double T);

}  // namespace semiswitch
