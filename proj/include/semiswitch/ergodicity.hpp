#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semiswitch/accessibility.hpp"
#include "semiswitch/process.hpp"
#include "semiswitch/rng.hpp"
#include "semiswitch/system.hpp"

namespace semiswitch {

struct LyapunovParams {
  double delta = 0.5;
  double beta = 1.0;
  double C = 1.0;
  double lambda_min = 1.0;

  double gamma() const { return delta * beta * lambda_min; }
  // Decay constants taken from the laws (declared or derived).
  static LyapunovParams from_system(const SwitchedSystem& sys, double delta);
  // Throws NoExpDecay when some law violates G(t) <= C exp(-beta t) on a grid.
  void validate(const SwitchedSystem& sys) const;
};

// f(x,s,i) by deterministic quadrature of the expectation; +inf when the survival denominator is below 1e-12.
double lyapunov_f(const SwitchedSystem& sys, const HybridState& z, const LyapunovParams& p);
// Same quantity with the expectation replaced by n Monte-Carlo draws.
Estimate lyapunov_f_mc(const SwitchedSystem& sys, const HybridState& z, const LyapunovParams& p, std::size_t n,
                       ReplicaStream& rng);

struct DriftRecord {
  HybridState z;
  double t = 0.0;
  double f0 = 0.0;
  double bound = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  bool pass = false;
};

DriftRecord drift_check(const SwitchedSystem& sys, const HybridState& z, double t, const LyapunovParams& p,
                        std::size_t replicas, std::uint64_t seed, int threads = 1);

// Values on a (position x delay x state) grid for a one-dimensional system.
struct GridFunction1D {
  std::vector<double> x;
  std::vector<double> tau;
  int states = 0;
  std::vector<double> values;  // index (i * x.size() + ix) * tau.size() + it

  static GridFunction1D tabulate(std::vector<double> x, std::vector<double> tau, int states,
                                 const std::function<double(double, double, int)>& f);
  double& at(int i, std::size_t ix, std::size_t it) { return values[(i * x.size() + ix) * tau.size() + it]; }
  double at(int i, std::size_t ix, std::size_t it) const { return values[(i * x.size() + ix) * tau.size() + it]; }
  // Bilinear interpolation, constant beyond the grid ends.
  double interpolate(double xv, double tv, int i) const;
  void validate() const;
};

struct SemigroupOptions {
  std::size_t time_points = 200;
  int threads = 1;
  std::size_t bound_draws = 20000;
  std::uint64_t seed = 1;
};

struct SemigroupResult {
  GridFunction1D value;
  // Sup-norm distance between successive iterates on the output grid.
  std::vector<double> increments;
  // (|Psi| + |f|) P(sum of k-1 dominating holding times <= t) for each k.
  std::vector<double> tail_bounds;
};

// k iterations of the renewal operator started from Psi(z,t) = f(z); returns an approximation of P_t f.
SemigroupResult semigroup_iterate(const SwitchedSystem& sys, const GridFunction1D& f, double t, int iterations,
                                  const SemigroupOptions& opt = {});

HybridState resolvent_sample(const SwitchedSystem& sys, const HybridState& z, ReplicaStream& rng);

struct RegularityProbe {
  bool regular = false;
  double lower_bound = 0.0;
};

// Minimum of the declared density over [t - radius, t + radius] (clipped at 0).
RegularityProbe regularity_probe(const HoldingLaw& law, double t, double radius, std::size_t points = 1000);

struct SubmersionCertificate {
  bool admissible = false;
  bool full_rank = false;
  bool regular = false;
  int rank = 0;
  AdmissibilityReport admissibility;
  std::vector<double> density_bounds;
  std::vector<std::string> diagnostics;
  bool all() const { return admissible && full_rank && regular; }
};

// Checks a sequence of m+2 legs whose first m+1 times sum to T.
SubmersionCertificate submersion_certificate(const SwitchedSystem& sys, const HybridState& z,
                                             const ControlSequence& cs, double T, double radius = 1e-3);

}  // namespace semiswitch
