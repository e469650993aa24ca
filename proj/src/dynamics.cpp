#include "semiswitch/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include "semiswitch/errors.hpp"
#include "semiswitch/integrator.hpp"

namespace semiswitch {

Vec flow(const VectorFieldSpec& field, double t, const Vec& x, const FlowConfig& cfg) {
  if (!x.allFinite()) throw DomainViolation("flow started from a non-finite point");
  if (t == 0.0) return x;
  if (t < 0.0 && field.backward_horizon) {
    double h = field.backward_horizon(x);
    if (t < -h) throw BackwardHorizonExceeded("backward time " + std::to_string(-t) + " exceeds horizon " + std::to_string(h));
  }
  if (field.closed_form_flow && t >= field.closed_form_min_t) {
    Vec y = field.closed_form_flow(t, x);
    if (!y.allFinite()) throw IntegrationDiverged("closed-form flow returned a non-finite value");
    return y;
  }
  if (t > 0.0) return integrate(field.rhs, x, t, cfg);
  const auto& rhs = field.rhs;
  return integrate([&rhs](const Vec& y) { return Vec(-rhs(y)); }, x, -t, cfg);
}

Vec flow(const SwitchedSystem& sys, int i, double t, const Vec& x) {
  return flow(sys.fields.at(i), t, x, sys.flow_config);
}

CompositeFlowResult composite_flow(const FieldList& fields, const ControlSequence& cs, const Vec& x,
                                   const FlowConfig& cfg) {
  if (cs.times.size() != cs.indices.size()) throw InvalidArgument("control sequence lengths differ");
  CompositeFlowResult r;
  r.points.reserve(cs.size() + 1);
  r.points.push_back(x);
  Vec y = x;
  for (size_t k = 0; k < cs.size(); ++k) {
    try {
      y = flow(fields.at(cs.indices[k]), cs.times[k], y, cfg);
    } catch (Error& e) {
      e.set_leg(static_cast<int>(k) + 1);
      throw;
    }
    r.points.push_back(y);
  }
  r.endpoint = y;
  return r;
}

CompositeFlowResult composite_flow(const SwitchedSystem& sys, const ControlSequence& cs, const Vec& x) {
  return composite_flow(sys.fields, cs, x, sys.flow_config);
}

Mat jacobian_fd(const VectorFieldSpec& field, const Vec& x) {
  const auto d = x.size();
  Mat J(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (field.rhs(xp) - field.rhs(xm)) / (xp[j] - xm[j]);
  }
  return J;
}

Mat jacobian(const VectorFieldSpec& field, const Vec& x) {
  if (field.jacobian) return field.jacobian(x);
  return jacobian_fd(field, x);
}

namespace {

template <class T>
struct JetLevel {
  static constexpr int value = 0;
};
template <class T>
struct JetLevel<Dual<T>> {
  static constexpr int value = 1 + JetLevel<T>::value;
};

template <class T>
std::vector<T> eval_field(const VectorFieldSpec& f, const std::vector<T>& x) {
  std::vector<T> out(x.size());
  f.jets->get<T>()(std::span<const T>(x.data(), x.size()), std::span<T>(out.data(), out.size()));
  return out;
}

template <class T>
std::vector<Dual<T>> seed(const std::vector<T>& x, const std::vector<T>& dir) {
  std::vector<Dual<T>> out(x.size());
  for (size_t k = 0; k < x.size(); ++k) out[k] = Dual<T>(x[k], dir[k]);
  return out;
}

template <class T>
std::vector<T> tangent(const std::vector<Dual<T>>& v) {
  std::vector<T> out(v.size());
  for (size_t k = 0; k < v.size(); ++k) out[k] = v[k].d;
  return out;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }
std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// Bracket family member: a seed (field or difference of two fields) with a chain of left brackets.
struct Member {
  int seed_a = 0;
  int seed_b = -1;              // -1 for a plain field
  std::vector<int> chain;       // chain {i1, i2}: [F^{i2}, [F^{i1}, seed]]
  std::string label;
};

template <class T>
std::vector<T> eval_member(const FieldList& fields, const Member& m, size_t level, const std::vector<T>& x) {
  if (level == 0) {
    std::vector<T> v = eval_field<T>(fields[m.seed_a], x);
    if (m.seed_b >= 0) {
      std::vector<T> w = eval_field<T>(fields[m.seed_b], x);
      for (size_t k = 0; k < v.size(); ++k) v[k] = v[k] - w[k];
    }
    return v;
  }
  if constexpr (JetLevel<T>::value >= kMaxJetDepth) {
    throw DepthBudgetExceeded("bracket depth exceeds the supported jet depth");
  } else {
    const VectorFieldSpec& fi = fields[m.chain[level - 1]];
    std::vector<T> f = eval_field<T>(fi, x);
    std::vector<T> v = eval_member<T>(fields, m, level - 1, x);
    std::vector<T> dv_f = tangent(eval_member<Dual<T>>(fields, m, level - 1, seed(x, f)));
    std::vector<T> df_v = tangent(eval_field<Dual<T>>(fi, seed(x, v)));
    for (size_t k = 0; k < f.size(); ++k) dv_f[k] = dv_f[k] - df_v[k];
    return dv_f;
  }
}

Vec fd_directional(const std::function<Vec(const Vec&)>& g, const Vec& x, const Vec& w, int order) {
  double wn = w.norm();
  if (wn == 0.0) return Vec::Zero(x.size());
  double h = std::pow(2.2e-16, 1.0 / (order + 2)) * std::max(1.0, x.norm()) / wn;
  return (g(x + h * w) - g(x - h * w)) / (2.0 * h);
}

std::function<Vec(const Vec&)> fd_member(const FieldList& fields, const Member& m, size_t level) {
  if (level == 0) {
    const VectorFieldSpec* a = &fields[m.seed_a];
    const VectorFieldSpec* b = m.seed_b >= 0 ? &fields[m.seed_b] : nullptr;
    return [a, b](const Vec& y) { return b ? Vec(a->rhs(y) - b->rhs(y)) : a->rhs(y); };
  }
  auto inner = fd_member(fields, m, level - 1);
  const VectorFieldSpec* fi = &fields[m.chain[level - 1]];
  int order = static_cast<int>(level);
  return [inner, fi, order](const Vec& y) {
    Vec f = fi->rhs(y);
    Vec v = inner(y);
    return Vec(fd_directional(inner, y, f, order) - fd_directional(fi->rhs, y, v, order));
  };
}

bool all_have_jets(const FieldList& fields) {
  return std::all_of(fields.begin(), fields.end(), [](const VectorFieldSpec& f) { return f.jets != nullptr; });
}

}  // namespace

Vec directional_derivative(const VectorFieldSpec& field, const Vec& x, const Vec& v) {
  if (field.jets) {
    auto xs = from_vec(x);
    auto vs = from_vec(v);
    return to_vec(tangent(eval_field<D1>(field, seed(xs, vs))));
  }
  return jacobian(field, x) * v;
}

Vec lie_bracket(const VectorFieldSpec& fi, const VectorFieldSpec& fj, const Vec& x) {
  return directional_derivative(fj, x, fi.rhs(x)) - directional_derivative(fi, x, fj.rhs(x));
}

Vec lie_bracket(const SwitchedSystem& sys, int i, int j, const Vec& x) {
  return lie_bracket(sys.fields.at(i), sys.fields.at(j), x);
}

int numerical_rank(const Mat& m, double rel_cutoff, double abs_floor, Vec* singular_values) {
  if (m.size() == 0) {
    if (singular_values) *singular_values = Vec();
    return 0;
  }
  Eigen::JacobiSVD<Mat> svd(m);
  Vec sv = svd.singularValues();
  if (singular_values) *singular_values = sv;
  double smax = sv.size() ? sv[0] : 0.0;
  if (!(smax > 0.0)) return 0;
  double cut = std::max(rel_cutoff * smax, abs_floor);
  int r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > cut) ++r;
  return r;
}

BracketRankResult bracket_rank(const FieldList& fields, const Vec& x, BracketMode mode, const BracketOptions& opt) {
  if (opt.depth < 0) throw InvalidArgument("bracket depth must be nonnegative");
  const int n = static_cast<int>(fields.size());
  const bool exact = all_have_jets(fields);
  if (exact && opt.depth > kMaxJetDepth)
    throw DepthBudgetExceeded("bracket depth " + std::to_string(opt.depth) + " exceeds " + std::to_string(kMaxJetDepth));

  auto evaluate = [&](const Member& m) -> Vec {
    if (exact) return to_vec(eval_member<double>(fields, m, m.chain.size(), from_vec(x)));
    return fd_member(fields, m, m.chain.size())(x);
  };

  BracketRankResult result;
  result.exact = exact;
  std::vector<Member> frontier;
  auto accept = [&](Member m, std::vector<Member>& next) {
    Vec v = evaluate(m);
    for (const auto& w : result.vectors)
      if ((v - w).norm() <= opt.dedup_tol) return;
    if (result.vectors.size() >= opt.max_family)
      throw DepthBudgetExceeded("bracket family exceeds " + std::to_string(opt.max_family) + " members");
    result.vectors.push_back(v);
    result.labels.push_back(m.label);
    next.push_back(std::move(m));
  };

  if (mode == BracketMode::Weak) {
    for (int i = 0; i < n; ++i) accept(Member{i, -1, {}, "F" + std::to_string(i)}, frontier);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        accept(Member{i, j, {}, "F" + std::to_string(i) + "-F" + std::to_string(j)}, frontier);
  }
  for (int level = 1; level <= opt.depth && !frontier.empty(); ++level) {
    std::vector<Member> next;
    for (const auto& m : frontier)
      for (int i = 0; i < n; ++i) {
        Member b = m;
        b.chain.push_back(i);
        b.label = "[F" + std::to_string(i) + "," + m.label + "]";
        accept(std::move(b), next);
      }
    frontier = std::move(next);
  }

  Mat A(x.size(), static_cast<Eigen::Index>(result.vectors.size()));
  for (size_t k = 0; k < result.vectors.size(); ++k) A.col(static_cast<Eigen::Index>(k)) = result.vectors[k];
  result.rank = numerical_rank(A, opt.rel_cutoff, 0.0, &result.singular_values);
  return result;
}

SubmersionJacobian submersion_jacobian(const FieldList& fields, const Vec& x, const std::vector<int>& indices,
                                       const std::vector<double>& times, double T, const FlowConfig& cfg) {
  const size_t m = times.size();
  if (indices.size() != m + 1) throw InvalidArgument("submersion map needs m+1 indices for m times");
  double sum = 0.0;
  for (double t : times) {
    if (!(t > 0.0)) throw DomainViolation("submersion times must be positive");
    sum += t;
  }
  if (!(sum < T)) throw DomainViolation("sum of submersion times must be below T");

  bool closed = std::all_of(indices.begin(), indices.end(),
                            [&](int i) { return static_cast<bool>(fields.at(i).closed_form_flow); });
  FlowConfig tight = cfg;
  tight.abs_tol = std::min(cfg.abs_tol, 1e-12);
  tight.rel_tol = std::min(cfg.rel_tol, 1e-12);

  auto psi = [&](const std::vector<double>& v) {
    Vec y = x;
    double used = 0.0;
    for (size_t k = 0; k < m; ++k) {
      y = flow(fields[indices[k]], v[k], y, tight);
      used += v[k];
    }
    return flow(fields[indices[m]], T - used, y, tight);
  };

  SubmersionJacobian out;
  out.jacobian.resize(x.size(), static_cast<Eigen::Index>(m));
  double slack = T - sum;
  double hmin = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (size_t k = 0; k < m; ++k) {
    double h = std::min({1e-4 * std::max(1.0, times[k]), 0.25 * times[k], 0.25 * slack});
    hmin = std::min(hmin, h);
    auto vp = times, vm = times;
    vp[k] += h;
    vm[k] -= h;
    Vec a = psi(vp);
    scale = std::max(scale, a.norm());
    out.jacobian.col(static_cast<Eigen::Index>(k)) = (a - psi(vm)) / (2.0 * h);
  }
  double noise = (closed ? 1e-14 : 1e-11) * scale / hmin;
  out.rank = numerical_rank(out.jacobian, 1e-8, 100.0 * noise, &out.singular_values);
  return out;
}

LipschitzConstants composite_lipschitz(const FieldList& fields, const CompactSet& M, double T, ReplicaStream& rng,
                                       int samples, double safety, const FlowConfig& cfg) {
  const int n = static_cast<int>(fields.size());
  LipschitzConstants out;
  auto probe = [&](const Vec& y) {
    for (const auto& f : fields) {
      out.C = std::max(out.C, f.rhs(y).norm());
      Mat J = jacobian(f, y);
      out.L = std::max(out.L, J.rows() == 1 ? std::abs(J(0, 0)) : Eigen::JacobiSVD<Mat>(J).singularValues()[0]);
    }
  };
  for (int s = 0; s < samples; ++s) {
    Vec y = M.sample(rng);
    probe(y);
    int legs = 1 + static_cast<int>(rng.uniform() * 4.0);
    double budget = T * rng.uniform();
    for (int l = 0; l < legs && budget > 0.0; ++l) {
      int i = std::min(n - 1, static_cast<int>(rng.uniform() * n));
      double t = (l + 1 == legs) ? budget : budget * rng.uniform();
      y = flow(fields[i], t, y, cfg);
      budget -= t;
      probe(y);
    }
  }
  out.C *= safety;
  out.L *= safety;
  return out;
}

}  // namespace semiswitch
