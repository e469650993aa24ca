#include "semiswitch/process.hpp"

#include <algorithm>
#include <cmath>

#include "semiswitch/dynamics.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/integrator.hpp"
#include "semiswitch/parallel.hpp"
#include "semiswitch/switching.hpp"

namespace semiswitch {

bool in_K(const SwitchedSystem& sys, const HybridState& z) {
  if (z.i < 0 || z.i >= sys.states() || z.x.size() != sys.dim) return false;
  if (!(z.s >= 0.0) || !std::isfinite(z.s) || !z.x.allFinite()) return false;
  if (!(z.s < sys.fields[z.i].horizon(z.x))) return false;
  try {
    return cumulative_rate(sys, z, 0.0) < sys.laws[z.i].tbar();
  } catch (const Error&) {
    return false;
  }
}

bool in_K_M(const SwitchedSystem& sys, const HybridState& z, std::string* diagnostic) {
  auto fail = [&](const std::string& why) {
    if (diagnostic) *diagnostic = why;
    return false;
  };
  if (!sys.compact) return fail("no compact set declared");
  if (!sys.compact->contains(z.x)) return fail("x outside M");
  if (!in_K(sys, z)) return fail("state outside K");
  try {
    Vec back = flow(sys, z.i, -z.s, z.x);
    if (!sys.compact->contains(back)) return fail("backward point outside M");
  } catch (const Error& e) {
    return fail(std::string(e.kind()) + ": " + e.what());
  }
  if (diagnostic) diagnostic->clear();
  return true;
}

std::vector<Vec> flow_at_times(const SwitchedSystem& sys, int i, const Vec& x, const std::vector<double>& times) {
  const auto& f = sys.fields.at(i);
  if (f.closed_form_flow && f.closed_form_min_t <= 0.0) {
    std::vector<Vec> out;
    out.reserve(times.size());
    for (double r : times) out.push_back(r == 0.0 ? x : f.closed_form_flow(r, x));
    return out;
  }
  return integrate_at(f.rhs, x, times, sys.flow_config);
}

TrajectoryRecord simulate(const SwitchedSystem& sys, const HybridState& z0, double t_end, ReplicaStream& rng,
                          const SimulationOptions& opt) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be finite and nonnegative");
  if (!in_K(sys, z0)) throw NotInK("initial state is outside K");
  TrajectoryRecord rec;
  rec.z0 = z0;
  rec.t_end = t_end;
  rec.marks.push_back({0.0, z0});

  std::vector<double> grid;
  if (opt.dense_dt > 0.0) {
    auto n = static_cast<std::size_t>(std::floor(t_end / opt.dense_dt + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) grid.push_back(std::min(t_end, static_cast<double>(k) * opt.dense_dt));
  }
  grid.insert(grid.end(), opt.sample_times.begin(), opt.sample_times.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::size_t next = 0;

  HybridState z = z0;
  double T = 0.0;
  for (;;) {
    double u = rng.uniform_open_closed();
    double v = rng.uniform_open_closed();
    HoldingDraw draw = draw_holding(sys, z, u);
    double Tn = T + draw.time;
    std::vector<double> rel;
    std::size_t first = next;
    while (next < grid.size() && grid[next] < Tn && grid[next] <= t_end) {
      rel.push_back(grid[next] - T);
      ++next;
    }
    if (!rel.empty()) {
      auto pts = flow_at_times(sys, z.i, z.x, rel);
      for (std::size_t k = 0; k < rel.size(); ++k)
        rec.dense.push_back({grid[first + k], pts[k], z.s + rel[k], z.i});
    }
    if (Tn > t_end) {
      rec.next_jump = Tn;
      break;
    }
    z = post_jump(sys, draw.x_end, z.i, v);
    T = Tn;
    rec.marks.push_back({T, z});
    if (rec.marks.size() - 1 > opt.jump_budget)
      throw JumpBudgetExceeded("more than " + std::to_string(opt.jump_budget) + " jumps before t_end");
  }
  return rec;
}

std::vector<TrajectoryRecord> simulate_replicas(const SwitchedSystem& sys, const HybridState& z0, double t_end,
                                                std::uint64_t seed, std::size_t replicas, int threads,
                                                const SimulationOptions& opt) {
  std::vector<TrajectoryRecord> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    ReplicaStream rng = ReplicaStream::derive(seed, r);
    out[r] = simulate(sys, z0, t_end, rng, opt);
    out[r].seed = seed;
    out[r].replica = r;
  });
  return out;
}

HybridState state_at(const SwitchedSystem& sys, const TrajectoryRecord& traj, double t) {
  if (!(t >= 0.0) || t > traj.t_end) throw OutOfRange("time outside [0, t_end]");
  auto it = std::upper_bound(traj.marks.begin(), traj.marks.end(), t,
                             [](double v, const Mark& m) { return v < m.t; });
  const Mark& m = *std::prev(it);
  double r = t - m.t;
  return HybridState{flow(sys, m.z.i, r, m.z.x), m.z.s + r, m.z.i};
}

std::size_t jump_count(const TrajectoryRecord& traj, double t) {
  auto it = std::upper_bound(traj.marks.begin() + 1, traj.marks.end(), t,
                             [](double v, const Mark& m) { return v < m.t; });
  return static_cast<std::size_t>(it - (traj.marks.begin() + 1));
}

Estimate expected_jump_bound(const SwitchedSystem& sys, double t, int truncation, std::size_t draws,
                             ReplicaStream& rng) {
  if (draws == 0) throw InvalidArgument("expected_jump_bound needs at least one draw");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t n = 0; n < draws; ++n) {
    double acc = 0.0;
    int count = 0;
    for (int k = 1; k <= truncation; ++k) {
      acc += dominating_quantile(sys, rng.uniform_open_closed());
      if (acc > t) break;
      ++count;
    }
    sum += count;
    sum2 += static_cast<double>(count) * count;
  }
  double n = static_cast<double>(draws);
  double mean = sum / n;
  double var = std::max(0.0, sum2 / n - mean * mean) * n / std::max(1.0, n - 1.0);
  return {1.0 + mean, std::sqrt(var / n)};
}

}  // namespace semiswitch
