#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "semiswitch/rng.hpp"
#include "semiswitch/system.hpp"

namespace semiswitch {

struct Mark {
  double t = 0.0;
  HybridState z;
};

struct DenseSample {
  double t = 0.0;
  Vec x;
  double tau = 0.0;
  int i = 0;
};

struct TrajectoryRecord {
  HybridState z0;
  double t_end = 0.0;
  std::vector<Mark> marks;  // marks[0] = (0, z0)
  std::vector<DenseSample> dense;
  double next_jump = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
};

struct SimulationOptions {
  // Uniform sampling step for the dense path; 0 disables it.
  double dense_dt = 0.0;
  // Extra sample times (sorted, within [0, t_end]).
  std::vector<double> sample_times;
  std::size_t jump_budget = 1'000'000;
};

bool in_K(const SwitchedSystem& sys, const HybridState& z);
bool in_K_M(const SwitchedSystem& sys, const HybridState& z, std::string* diagnostic = nullptr);

TrajectoryRecord simulate(const SwitchedSystem& sys, const HybridState& z0, double t_end, ReplicaStream& rng,
                          const SimulationOptions& opt = {});

// Independent replicas with streams derived from (seed, replica index).
std::vector<TrajectoryRecord> simulate_replicas(const SwitchedSystem& sys, const HybridState& z0, double t_end,
                                                std::uint64_t seed, std::size_t replicas, int threads,
                                                const SimulationOptions& opt = {});

HybridState state_at(const SwitchedSystem& sys, const TrajectoryRecord& traj, double t);
std::size_t jump_count(const TrajectoryRecord& traj, double t);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo value of 1 + sum_{k<=K} P(t >= T~_k) for the renewal process with survival H.
Estimate expected_jump_bound(const SwitchedSystem& sys, double t, int truncation, std::size_t draws,
                             ReplicaStream& rng);

// Positions phi^i_r(x) at the sorted relative times r.
std::vector<Vec> flow_at_times(const SwitchedSystem& sys, int i, const Vec& x, const std::vector<double>& times);

}  // namespace semiswitch
