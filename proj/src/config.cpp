#include "semiswitch/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "semiswitch/errors.hpp"
#include "semiswitch/expression.hpp"

namespace semiswitch {

namespace {

using json = nlohmann::json;

const std::set<std::string> kExperiments = {"simulate",          "occupation",   "drift",     "tv-decay", "invasion",
                                            "certify-submersion", "plan-access", "fixedpoint", "km-boundary"};

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? std::string("/") : path) + ": " + msg);
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) bad(path, "missing required key '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

double number_at(const json& j, const std::string& key, const std::string& path) {
  return number(need(j, key, path), path + "/" + key);
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path + "/" + std::to_string(k)));
  return out;
}

Vec vec(const json& j, const std::string& path, int dim) {
  auto v = numbers(j, path);
  if (dim >= 0 && static_cast<int>(v.size()) != dim) bad(path, "expected " + std::to_string(dim) + " entries");
  return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat mat(const json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) bad(path, "expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) m.row(r) = vec(j[r], path + "/" + std::to_string(r), cols).transpose();
  return m;
}

std::vector<std::string> variable_names(int dim) {
  static const char* aliases[] = {"x", "y", "z"};
  std::vector<std::string> v;
  for (int k = 0; k < dim; ++k) {
    std::string n = "x" + std::to_string(k + 1);
    if (k < 3) n += std::string("|") + aliases[k];
    v.push_back(n);
  }
  return v;
}

Expression parse_expr(const json& j, const std::string& path, int dim) {
  if (!j.is_string()) bad(path, "expected an expression string");
  try {
    return Expression::parse(j.get<std::string>(), variable_names(dim));
  } catch (const ConfigError& e) {
    bad(path, e.what());
  }
}

VectorFieldSpec parse_field(const json& j, const std::string& path, int dim, int index) {
  std::string label = j.contains("label") ? j["label"].get<std::string>() : "field-" + std::to_string(index);
  VectorFieldSpec f;
  if (j.contains("expr")) {
    const json& e = j["expr"];
    if (!e.is_array() || static_cast<int>(e.size()) != dim) bad(path + "/expr", "expected one expression per coordinate");
    std::vector<Expression> comps;
    for (int k = 0; k < dim; ++k) comps.push_back(parse_expr(e[k], path + "/expr/" + std::to_string(k), dim));
    auto shared = std::make_shared<std::vector<Expression>>(std::move(comps));
    f = make_field(label, dim, [shared](auto x, auto out) {
      using T = std::decay_t<decltype(out[0])>;
      for (std::size_t k = 0; k < shared->size(); ++k) out[k] = (*shared)[k].template eval<T>(x);
    });
  } else if (j.contains("affine")) {
    const json& a = j["affine"];
    f = affine_field(label, mat(need(a, "A", path + "/affine"), path + "/affine/A", dim, dim),
                     vec(need(a, "b", path + "/affine"), path + "/affine/b", dim));
  } else if (j.contains("constant")) {
    f = constant_field(label, vec(j["constant"], path + "/constant", dim));
  } else if (j.contains("relax")) {
    f = relaxation_field(label, vec(j["relax"], path + "/relax", dim));
  } else {
    bad(path, "field needs one of 'expr', 'affine', 'constant' or 'relax'");
  }
  if (j.contains("analytic")) f.analytic = j["analytic"].get<bool>();
  return f;
}

HoldingLaw parse_law(const json& j, const std::string& path) {
  std::string kind = need(j, "kind", path).get<std::string>();
  HoldingLaw law;
  try {
    if (kind == "exponential") law = HoldingLaw::exponential(number_at(j, "rate", path));
    else if (kind == "uniform") law = HoldingLaw::uniform(number_at(j, "a", path), number_at(j, "b", path));
    else if (kind == "shifted_uniform") {
      double s = number_at(j, "shift", path);
      law = HoldingLaw::uniform(s + number_at(j, "a", path), s + number_at(j, "b", path));
    } else if (kind == "dirac") law = HoldingLaw::dirac(number_at(j, "t", path));
    else if (kind == "atom_mixture") {
      const json& a = need(j, "atoms", path);
      if (!a.is_array()) bad(path + "/atoms", "expected [[t, w], ...]");
      std::vector<std::pair<double, double>> atoms;
      for (std::size_t k = 0; k < a.size(); ++k) {
        auto tw = numbers(a[k], path + "/atoms/" + std::to_string(k));
        if (tw.size() != 2) bad(path + "/atoms/" + std::to_string(k), "expected [t, w]");
        atoms.emplace_back(tw[0], tw[1]);
      }
      law = HoldingLaw::atoms(atoms);
    } else if (kind == "table") {
      law = HoldingLaw::table(numbers(need(j, "t", path), path + "/t"), numbers(need(j, "G", path), path + "/G"));
    } else {
      bad(path + "/kind", "unknown law kind '" + kind + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad(path, e.what());
  }
  if (j.contains("exp_decay"))
    law.set_exp_decay({number_at(j["exp_decay"], "C", path + "/exp_decay"),
                       number_at(j["exp_decay"], "beta", path + "/exp_decay")});
  if (j.contains("regular_points")) law.set_regular_points(numbers(j["regular_points"], path + "/regular_points"));
  return law;
}

RateFunction parse_rate(const json& j, const std::string& path, int dim) {
  if (j.is_number()) return RateFunction::constant_rate(number(j, path));
  if (j.contains("constant")) {
    double v = number_at(j, "constant", path);
    if (!(v > 0.0)) bad(path + "/constant", "rate must be positive");
    return RateFunction::constant_rate(v);
  }
  auto e = std::make_shared<Expression>(parse_expr(need(j, "expr", path), path + "/expr", dim));
  RateFunction r;
  r.eval = [e](const Vec& x) { return (*e)(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); };
  r.lambda_min = number_at(j, "min", path);
  r.lambda_max = number_at(j, "max", path);
  return r;
}

JumpMatrix parse_jump(const json& j, const std::string& path, int n, int dim) {
  JumpMatrix q;
  if (j.value("flip", false)) {
    if (n != 2) bad(path + "/flip", "flip needs exactly two states");
    q = JumpMatrix::uniform_off_diagonal(2);
  } else if (j.value("uniform", false)) {
    q = JumpMatrix::uniform_off_diagonal(n);
  } else if (j.contains("matrix")) {
    q = JumpMatrix::constant(mat(j["matrix"], path + "/matrix", n, n));
  } else if (j.contains("expr")) {
    const json& e = j["expr"];
    if (!e.is_array() || static_cast<int>(e.size()) != n) bad(path + "/expr", "expected " + std::to_string(n) + " rows");
    auto cells = std::make_shared<std::vector<Expression>>();
    for (int r = 0; r < n; ++r) {
      if (!e[r].is_array() || static_cast<int>(e[r].size()) != n)
        bad(path + "/expr/" + std::to_string(r), "expected " + std::to_string(n) + " entries");
      for (int c = 0; c < n; ++c)
        cells->push_back(parse_expr(e[r][c], path + "/expr/" + std::to_string(r) + "/" + std::to_string(c), dim));
    }
    q.eval = [cells, n](const Vec& x) {
      Mat m(n, n);
      std::span<const double> v(x.data(), static_cast<std::size_t>(x.size()));
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = (*cells)[static_cast<std::size_t>(r * n + c)](v);
      return m;
    };
  } else {
    bad(path, "jump needs one of 'flip', 'uniform', 'matrix' or 'expr'");
  }
  if (j.contains("irreducible")) q.globally_irreducible = j["irreducible"].get<bool>();
  if (j.contains("witness")) {
    const json& w = j["witness"];
    for (std::size_t k = 0; k < w.size(); ++k) {
      auto p = numbers(w[k], path + "/witness/" + std::to_string(k));
      if (p.size() != 2) bad(path + "/witness/" + std::to_string(k), "expected [i, j]");
      q.witness.emplace_back(static_cast<int>(p[0]), static_cast<int>(p[1]));
    }
  }
  return q;
}

HybridState parse_state(const json& j, const std::string& path, int dim, int states) {
  HybridState z;
  z.x = vec(need(j, "x", path), path + "/x", dim);
  z.s = j.contains("s") ? number(j["s"], path + "/s") : 0.0;
  z.i = j.contains("i") ? integer(j["i"], path + "/i") : 0;
  if (z.s < 0.0) bad(path + "/s", "delay must be nonnegative");
  if (z.i < 0 || z.i >= states) bad(path + "/i", "state index out of range");
  return z;
}

SwitchedSystem parse_system(const json& j) {
  SwitchedSystem sys;
  sys.name = j.value("name", std::string("custom"));
  sys.dim = integer(need(j, "dim", ""), "/dim");
  if (sys.dim < 1) bad("/dim", "dimension must be positive");
  const json& fields = need(j, "fields", "");
  if (!fields.is_array() || fields.size() < 2) bad("/fields", "expected at least two fields");
  for (std::size_t k = 0; k < fields.size(); ++k)
    sys.fields.push_back(parse_field(fields[k], "/fields/" + std::to_string(k), sys.dim, static_cast<int>(k)));
  const int n = sys.states();
  const json& laws = need(j, "laws", "");
  if (!laws.is_array() || static_cast<int>(laws.size()) != n) bad("/laws", "expected one law per field");
  for (int k = 0; k < n; ++k) sys.laws.push_back(parse_law(laws[k], "/laws/" + std::to_string(k)));
  if (j.contains("rates")) {
    const json& rates = j["rates"];
    if (!rates.is_array() || static_cast<int>(rates.size()) != n) bad("/rates", "expected one rate per field");
    for (int k = 0; k < n; ++k) sys.rates.push_back(parse_rate(rates[k], "/rates/" + std::to_string(k), sys.dim));
  } else {
    sys.rates.assign(n, RateFunction::constant_rate(1.0));
  }
  sys.jump = parse_jump(need(j, "jump", ""), "/jump", n, sys.dim);
  if (j.contains("compact")) {
    const json& c = j["compact"];
    if (c.contains("box"))
      sys.compact = CompactSet::box(vec(need(c["box"], "lo", "/compact/box"), "/compact/box/lo", sys.dim),
                                    vec(need(c["box"], "hi", "/compact/box"), "/compact/box/hi", sys.dim));
    else if (c.contains("ball"))
      sys.compact = CompactSet::ball(vec(need(c["ball"], "center", "/compact/ball"), "/compact/ball/center", sys.dim),
                                     number_at(c["ball"], "radius", "/compact/ball"));
    else
      bad("/compact", "expected 'box' or 'ball'");
  }
  if (j.contains("flow")) {
    const json& f = j["flow"];
    std::string kind = f.value("integrator", std::string("adaptive"));
    if (kind == "rk4") sys.flow_config.kind = FlowConfig::Kind::Rk4;
    else if (kind != "adaptive") bad("/flow/integrator", "expected 'adaptive' or 'rk4'");
    if (f.contains("abs_tol")) sys.flow_config.abs_tol = number(f["abs_tol"], "/flow/abs_tol");
    if (f.contains("rel_tol")) sys.flow_config.rel_tol = number(f["rel_tol"], "/flow/rel_tol");
    if (f.contains("max_step")) sys.flow_config.max_step = number(f["max_step"], "/flow/max_step");
  }
  try {
    sys.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad("", std::string("system validation failed: ") + e.what());
  }
  return sys;
}

LVParams parse_lv(const json& j, const std::string& path) {
  LVParams p;
  auto pair = [&](const char* key, double* out) {
    if (!j.contains(key)) return;
    auto v = numbers(j[key], path + "/" + key);
    if (v.size() != 2) bad(path + "/" + key, "expected two values");
    out[0] = v[0];
    out[1] = v[1];
  };
  pair("alpha", p.alpha);
  pair("beta", p.beta);
  pair("a", p.a);
  pair("b", p.b);
  pair("c", p.c);
  pair("d", p.d);
  try {
    p.validate();
  } catch (const Error& e) {
    bad(path, e.what());
  }
  return p;
}

void apply_common(ScenarioConfig& cfg, const json& j) {
  const int dim = cfg.scenario.system.dim;
  const int n = cfg.scenario.system.states();
  if (j.contains("start")) cfg.scenario.start = parse_state(j["start"], "/start", dim, n);
  if (j.contains("alt_start")) cfg.scenario.alt_start = parse_state(j["alt_start"], "/alt_start", dim, n);
  if (j.contains("lv")) cfg.lv = parse_lv(j["lv"], "/lv");
  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    if (e.is_string()) {
      cfg.experiment = e.get<std::string>();
    } else {
      std::string kind = need(e, "kind", "/experiment").get<std::string>();
      json params = e;
      params.erase("kind");
      if (kind == cfg.experiment && cfg.params.is_object()) cfg.params.merge_patch(params);
      else cfg.params = params;
      cfg.experiment = kind;
    }
    if (!kExperiments.count(cfg.experiment)) bad("/experiment", "unknown experiment '" + cfg.experiment + "'");
  }
  if (j.contains("run")) {
    const json& r = j["run"];
    if (r.contains("seed")) {
      if (!r["seed"].is_number_unsigned()) bad("/run/seed", "expected a nonnegative integer");
      cfg.run.seed = r["seed"].get<std::uint64_t>();
    }
    if (r.contains("t_end")) cfg.run.t_end = number(r["t_end"], "/run/t_end");
    if (r.contains("replicas")) cfg.run.replicas = static_cast<std::size_t>(integer(r["replicas"], "/run/replicas"));
    if (r.contains("threads")) cfg.run.threads = integer(r["threads"], "/run/threads");
    if (r.contains("dt")) cfg.run.dt = number(r["dt"], "/run/dt");
    if (r.contains("format")) cfg.run.format = r["format"].get<std::string>();
  }
}

}  // namespace

ScenarioConfig builtin_config(const std::string& name) {
  ScenarioConfig cfg;
  cfg.scenario = make_builtin(name);
  cfg.experiment = cfg.scenario.info.experiment;
  if (name == "lv-dwell") cfg.lv = lv_dwell_params();
  if (name == "non-analytic") {
    cfg.params = {{"state", {{"x", {-1.5}}, {"s", 0.0}, {"i", 0}}},
                  {"sequence", {{"times", {1.2, 1.2, 1.2}}, {"indices", {0, 1, 0}}}},
                  {"T", 2.4},
                  {"bracket_point", {-0.5}}};
  }
  return cfg;
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  if (!j.is_object()) bad("", "expected a JSON object");
  ScenarioConfig cfg;
  try {
    if (j.contains("builtin")) {
      std::string name = j["builtin"].get<std::string>();
      if (!is_builtin(name)) bad("/builtin", "unknown builtin '" + name + "'");
      cfg = builtin_config(name);
    } else {
      cfg.scenario.system = parse_system(need(j, "system", ""));
      cfg.scenario.info.name = cfg.scenario.system.name;
      cfg.scenario.info.experiment = "simulate";
      cfg.experiment = "simulate";
      if (!j.contains("start")) bad("", "missing required key 'start'");
      cfg.scenario.alt_start = parse_state(j["start"], "/start", cfg.scenario.system.dim, cfg.scenario.system.states());
    }
    apply_common(cfg, j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ScenarioConfig resolve_config(const std::string& spec) {
  if (is_builtin(spec)) return builtin_config(spec);
  if (!std::filesystem::exists(spec))
    throw ConfigError("'" + spec + "' is neither a builtin scenario nor a config file");
  return load_config(spec);
}

}  // namespace semiswitch
