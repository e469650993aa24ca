#include "semiswitch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

#include "semiswitch/accessibility.hpp"
#include "semiswitch/dynamics.hpp"
#include "semiswitch/ergodicity.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/estimators.hpp"
#include "semiswitch/process.hpp"
#include "semiswitch/stats.hpp"
#include "semiswitch/switching.hpp"

namespace semiswitch {

using json = nlohmann::json;

json to_json(const HybridState& z) {
  return json{{"x", std::vector<double>(z.x.data(), z.x.data() + z.x.size())}, {"s", z.s}, {"i", z.i}};
}

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream os(fs::path(dir) / name);
  if (!os) throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
  os << std::setprecision(17);
  return os;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ControlSequence sequence_from(const json& j, const std::string& path) {
  ControlSequence cs;
  try {
    cs.times = j.at("times").get<std::vector<double>>();
    cs.indices = j.at("indices").get<std::vector<int>>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": expected {\"times\": [...], \"indices\": [...]}");
  }
  try {
    cs.validate();
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cs;
}

json sequence_json(const ControlSequence& cs) { return json{{"times", cs.times}, {"indices", cs.indices}}; }

Vec point_from(const json& j, int dim, const std::string& path) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": expected an array of numbers");
  }
  if (static_cast<int>(v.size()) != dim) throw ConfigError(path + ": wrong dimension");
  return Eigen::Map<Vec>(v.data(), dim);
}

void write_trajectory(const TrajectoryRecord& tr, int dim, const std::string& dir, const std::string& format) {
  if (format == "json") {
    json rows = json::array();
    for (const auto& d : tr.dense)
      rows.push_back({{"t", d.t}, {"x", std::vector<double>(d.x.data(), d.x.data() + dim)}, {"tau", d.tau}, {"i", d.i}});
    open_out(dir, "trajectories.json") << rows.dump() << '\n';
    json marks = json::array();
    for (const auto& m : tr.marks) marks.push_back({{"t", m.t}, {"z", to_json(m.z)}});
    open_out(dir, "marks.json") << marks.dump() << '\n';
    return;
  }
  auto os = open_out(dir, "trajectories.csv");
  os << "t";
  for (int k = 0; k < dim; ++k) os << ",x_" << k + 1;
  os << ",tau,i\n";
  for (const auto& d : tr.dense) {
    os << d.t;
    for (int k = 0; k < dim; ++k) os << ',' << d.x[k];
    os << ',' << d.tau << ',' << d.i << '\n';
  }
  auto ms = open_out(dir, "marks.csv");
  ms << "t";
  for (int k = 0; k < dim; ++k) ms << ",x_" << k + 1;
  ms << ",i\n";
  for (const auto& m : tr.marks) {
    ms << m.t;
    for (int k = 0; k < dim; ++k) ms << ',' << m.z.x[k];
    ms << ',' << m.z.i << '\n';
  }
}

void write_boundary(const std::string& dir, std::size_t points) {
  auto os = open_out(dir, "km_boundary.csv");
  os << "x,i,s_max\n";
  for (const auto& b : km_boundary(points)) {
    os << b.x << ',' << b.i << ',';
    if (std::isfinite(b.s)) os << b.s;
    else os << "inf";
    os << '\n';
  }
}

json run_simulate(const ScenarioConfig& cfg, const std::string& dir) {
  const auto& sys = cfg.scenario.system;
  const double t_end = cfg.run.t_end.value_or(10.0);
  const std::size_t reps = cfg.run.replicas.value_or(1);
  SimulationOptions opt;
  opt.dense_dt = cfg.run.dt;
  if (cfg.params.contains("jump_budget")) opt.jump_budget = cfg.params["jump_budget"].get<std::size_t>();
  auto trajs = simulate_replicas(sys, cfg.scenario.start, t_end, cfg.run.seed, std::max<std::size_t>(reps, 1),
                                 cfg.run.threads, opt);
  write_trajectory(trajs[0], sys.dim, dir, cfg.run.format);

  std::vector<double> counts;
  std::size_t outside_k = 0, outside_km = 0, samples = 0;
  Vec lo = Vec::Constant(sys.dim, std::numeric_limits<double>::infinity()), hi = -lo;
  double min_ratio = std::numeric_limits<double>::infinity();
  const double x0 = cfg.scenario.start.x.norm();
  const bool km = sys.compact && sys.compact->contains(cfg.scenario.start.x) && in_K_M(sys, cfg.scenario.start);
  for (const auto& tr : trajs) {
    counts.push_back(static_cast<double>(jump_count(tr, t_end)));
    auto visit = [&](const HybridState& z) {
      ++samples;
      if (!in_K(sys, z)) ++outside_k;
      if (km && !in_K_M(sys, z)) ++outside_km;
      lo = lo.cwiseMin(z.x);
      hi = hi.cwiseMax(z.x);
      if (x0 > 0.0) min_ratio = std::min(min_ratio, z.x.norm() / x0);
    };
    for (const auto& m : tr.marks) visit(m.z);
    for (const auto& d : tr.dense) visit(HybridState{d.x, d.tau, d.i});
  }
  MeanSe m = mean_and_se(counts);
  ReplicaStream rng = ReplicaStream::derive(cfg.run.seed, 1u << 30);
  Estimate bound = expected_jump_bound(sys, t_end, 400, 20000, rng);
  json r;
  r["t_end"] = t_end;
  r["replicas"] = trajs.size();
  r["jumps_first_replica"] = jump_count(trajs[0], t_end);
  r["mean_jumps"] = m.mean;
  r["mean_jumps_stderr"] = m.std_error;
  r["jump_bound"] = {{"value", bound.value}, {"stderr", bound.std_error}};
  r["sampled_states"] = samples;
  r["outside_K"] = outside_k;
  if (km) r["outside_K_M"] = outside_km;
  r["x_min"] = std::vector<double>(lo.data(), lo.data() + sys.dim);
  r["x_max"] = std::vector<double>(hi.data(), hi.data() + sys.dim);
  r["min_norm_ratio"] = finite_or_null(min_ratio);
  r["final_state"] = to_json(state_at(sys, trajs[0], t_end));
  if (cfg.scenario.info.name == "km-example" || cfg.params.value("km_boundary", false)) {
    write_boundary(dir, cfg.params.value("boundary_points", std::size_t{1000}));
    r["km_boundary_points"] = 2 * cfg.params.value("boundary_points", std::size_t{1000});
  }
  return r;
}

HistogramAxes axes_for(const ScenarioConfig& cfg, int x_bins, int tau_bins) {
  return HistogramAxes::defaults(cfg.scenario.system, cfg.params.value("x_bins", x_bins),
                                 cfg.params.value("tau_bins", tau_bins));
}

json run_occupation(const ScenarioConfig& cfg, const std::string& dir) {
  const auto& sys = cfg.scenario.system;
  const double T = cfg.run.t_end.value_or(100.0);
  OccupationOptions opt;
  opt.dt = cfg.run.dt;
  opt.seed = cfg.run.seed;
  opt.threads = cfg.run.threads;
  opt.replicas = cfg.run.replicas.value_or(1);
  std::string mode = cfg.params.value("mode", std::string(opt.replicas > 1 ? "replicas" : "single"));
  if (mode != "single" && mode != "replicas") throw ConfigError("/experiment/mode: expected 'single' or 'replicas'");
  opt.mode = mode == "single" ? OccupationMode::SingleTrajectory : OccupationMode::Replicas;
  double burn = cfg.params.value("burn_in", 0.1 * T);
  Histogram h = occupation_measure(sys, cfg.scenario.start, T, burn, axes_for(cfg, 64, 32), opt);
  if (cfg.run.format == "json") open_out(dir, "histogram.json") << h.to_json() << '\n';
  else {
    auto os = open_out(dir, "histogram.csv");
    h.write_csv(os);
    open_out(dir, "histogram.json") << h.to_json() << '\n';
  }
  return json{{"T", T}, {"burn_in", burn}, {"mode", mode}, {"samples", h.total()}, {"state_marginal", h.state_marginal()}};
}

json run_drift(const ScenarioConfig& cfg, const std::string&) {
  const auto& sys = cfg.scenario.system;
  LyapunovParams p = LyapunovParams::from_system(sys, cfg.params.value("delta", 0.5));
  p.validate(sys);
  std::vector<double> times = cfg.params.value("times", std::vector<double>{0.5, 1.0, 2.0});
  std::size_t reps = cfg.run.replicas.value_or(1000);
  json records = json::array();
  bool all = true;
  for (double t : times) {
    DriftRecord d = drift_check(sys, cfg.scenario.start, t, p, reps, cfg.run.seed, cfg.run.threads);
    all = all && d.pass;
    records.push_back({{"z", to_json(d.z)},
                       {"t", d.t},
                       {"bound", finite_or_null(d.bound)},
                       {"estimate", finite_or_null(d.estimate)},
                       {"stderr", d.std_error},
                       {"pass", d.pass}});
  }
  return json{{"gamma", p.gamma()}, {"beta", p.beta}, {"C", p.C}, {"delta", p.delta}, {"records", records}, {"pass", all}};
}

json run_tv(const ScenarioConfig& cfg, const std::string& dir) {
  const auto& sys = cfg.scenario.system;
  std::vector<double> times = cfg.params.value("times", std::vector<double>{1, 2, 4, 8, 16});
  std::size_t reps = cfg.run.replicas.value_or(2000);
  auto series = convergence_diagnostic(sys, cfg.scenario.start, cfg.scenario.alt_start, times, reps, cfg.run.seed,
                                       cfg.run.threads, axes_for(cfg, 16, 4));
  json rows = json::array();
  for (const auto& p : series) rows.push_back({{"t", p.t}, {"tv", p.tv}, {"stderr", p.noise}});
  if (cfg.run.format == "json") {
    open_out(dir, "tv_series.json") << rows.dump() << '\n';
  } else {
    auto os = open_out(dir, "tv_series.csv");
    os << "t,tv,stderr\n";
    for (const auto& p : series) os << p.t << ',' << p.tv << ',' << p.noise << '\n';
  }
  return json{{"replicas", reps},
              {"start_a", to_json(cfg.scenario.start)},
              {"start_b", to_json(cfg.scenario.alt_start)},
              {"series", rows},
              {"decreasing_within_noise", monotone_within_noise(series, 1)}};
}

json run_invasion(const ScenarioConfig& cfg, const std::string&) {
  if (!cfg.lv) throw ConfigError("/lv: the invasion experiment needs Lotka-Volterra constants");
  const auto& sys = cfg.scenario.system;
  const double T = cfg.run.t_end.value_or(1e4);
  InvasionEstimate est = invasion_rate(*cfg.lv, sys.laws.at(0), sys.laws.at(1), T, cfg.run.seed, cfg.scenario.start);
  json r{{"T", T},
         {"lambda_y", est.value},
         {"stderr", est.std_error},
         {"ci95", {est.lower, est.upper}},
         {"jumps", est.jumps},
         {"excursions", est.excursion_integrals.size()}};
  if (!est.excursion_integrals.empty())
    r["max_excursion_integral"] = *std::max_element(est.excursion_integrals.begin(), est.excursion_integrals.end());
  try {
    double d1 = delta1(*cfg.lv);
    r["delta1"] = d1;
    r["excursion_bound_at_delta1"] = excursion_integral_bound(*cfg.lv, d1);
  } catch (const DegenerateThreshold& e) {
    r["delta1"] = nullptr;
    r["delta1_note"] = e.what();
  }
  return r;
}

json run_certify(const ScenarioConfig& cfg, const std::string&) {
  const auto& sys = cfg.scenario.system;
  if (!cfg.params.contains("sequence")) throw ConfigError("/experiment/sequence: required for certify-submersion");
  ControlSequence cs = sequence_from(cfg.params["sequence"], "/experiment/sequence");
  HybridState z = cfg.scenario.start;
  if (cfg.params.contains("state")) {
    const json& s = cfg.params["state"];
    z.x = point_from(s.at("x"), sys.dim, "/experiment/state/x");
    z.s = s.value("s", 0.0);
    z.i = s.value("i", 0);
  }
  double T = 0.0;
  for (std::size_t k = 0; k + 1 < cs.size(); ++k) T += cs.times[k];
  T = cfg.params.value("T", T);
  SubmersionCertificate c = submersion_certificate(sys, z, cs, T, cfg.params.value("radius", 1e-3));
  Vec bx = cfg.params.contains("bracket_point") ? point_from(cfg.params["bracket_point"], sys.dim, "/experiment/bracket_point")
                                                 : z.x;
  json r{{"state", to_json(z)},
         {"sequence", sequence_json(cs)},
         {"T", T},
         {"admissible", c.admissible},
         {"admissibility_failure", to_string(c.admissibility.failing_condition)},
         {"full_rank", c.full_rank},
         {"rank", c.rank},
         {"regular", c.regular},
         {"density_bounds", c.density_bounds},
         {"diagnostics", c.diagnostics},
         {"certified", c.all()}};
  r["bracket_point"] = std::vector<double>(bx.data(), bx.data() + sys.dim);
  r["weak_bracket_rank"] = bracket_rank(sys.fields, bx, BracketMode::Weak).rank;
  r["strong_bracket_rank"] = bracket_rank(sys.fields, bx, BracketMode::Strong).rank;
  return r;
}

json run_plan(const ScenarioConfig& cfg, const std::string& dir) {
  const auto& sys = cfg.scenario.system;
  if (!cfg.params.contains("target")) throw ConfigError("/experiment/target: required for plan-access");
  ControlSequence target = sequence_from(cfg.params["target"], "/experiment/target");
  Vec x = cfg.params.contains("x") ? point_from(cfg.params["x"], sys.dim, "/experiment/x") : cfg.scenario.start.x;
  Algorithm1Options opt;
  opt.seed = cfg.run.seed;
  Algorithm1Result res = algorithm1(sys, x, target, cfg.params.value("epsilon", 1e-2), opt);
  HybridState z{x, 0.0, target.indices.front()};
  AdmissibilityReport rep = is_admissible(sys, z, res.sequence);
  auto os = open_out(dir, "plan.csv");
  os << "leg,time,index\n";
  for (std::size_t k = 0; k < res.sequence.size(); ++k)
    os << k + 1 << ',' << res.sequence.times[k] << ',' << res.sequence.indices[k] << '\n';
  return json{{"x", std::vector<double>(x.data(), x.data() + sys.dim)},
              {"target_sequence", sequence_json(target)},
              {"target_endpoint", std::vector<double>(res.target.data(), res.target.data() + sys.dim)},
              {"endpoint", std::vector<double>(res.endpoint.data(), res.endpoint.data() + sys.dim)},
              {"error", res.error},
              {"legs", res.sequence.size()},
              {"step", res.step},
              {"C", res.C},
              {"L", res.L},
              {"iterations", res.iterations},
              {"step_bounds", res.step_bounds},
              {"refinements", res.refinements},
              {"admissible", rep.verdict}};
}

json run_fixedpoint(const ScenarioConfig& cfg, const std::string&) {
  const auto& sys = cfg.scenario.system;
  int lower = cfg.params.value("lower", 0), upper = cfg.params.value("upper", 1);
  double t0 = cfg.params.value("t0", std::log(2.0)), t1 = cfg.params.value("t1", std::log(2.0));
  AccessibleCandidate c = one_d_accessible_point(sys, lower, upper, t0, t1, cfg.params.value("repetitions", 20),
                                                 cfg.params.value("epsilon", 1e-3));
  Vec xs = c.z.x;
  double diff = (sys.fields[upper].rhs(xs) - sys.fields[lower].rhs(xs)).norm();
  return json{{"x_star", xs[0]},
              {"contraction", c.fixed_point.contraction},
              {"iterations", c.fixed_point.iterations},
              {"candidate", to_json(c.z)},
              {"field_difference", diff},
              {"template_admissible", is_admissible(sys, HybridState{xs, 0.0, upper}, c.sequence).verdict}};
}

}  // namespace

json run_experiment(const ScenarioConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (cfg.run.format != "csv" && cfg.run.format != "json") throw ConfigError("--format must be csv or json");
  json r;
  const std::string& e = cfg.experiment;
  if (e == "simulate") r = run_simulate(cfg, out_dir);
  else if (e == "occupation") r = run_occupation(cfg, out_dir);
  else if (e == "drift") r = run_drift(cfg, out_dir);
  else if (e == "tv-decay") r = run_tv(cfg, out_dir);
  else if (e == "invasion") r = run_invasion(cfg, out_dir);
  else if (e == "certify-submersion") r = run_certify(cfg, out_dir);
  else if (e == "plan-access") r = run_plan(cfg, out_dir);
  else if (e == "fixedpoint") r = run_fixedpoint(cfg, out_dir);
  else if (e == "km-boundary") {
    std::size_t n = cfg.params.value("points", std::size_t{1000});
    write_boundary(out_dir, n);
    r = json{{"points", 2 * n}};
  } else {
    throw ConfigError("/experiment: unknown experiment '" + e + "'");
  }
  json report{{"scenario", cfg.scenario.info.name},
              {"description", cfg.scenario.info.description},
              {"anchor", cfg.scenario.info.anchor},
              {"experiment", e},
              {"seed", cfg.run.seed},
              {"result", r}};
  open_out(out_dir, "report.json") << report.dump(2) << '\n';
  return report;
}

}  // namespace semiswitch
