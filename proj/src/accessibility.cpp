#include "semiswitch/accessibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "semiswitch/dynamics.hpp"
#include "semiswitch/errors.hpp"
#include "semiswitch/switching.hpp"

namespace semiswitch {

const char* to_string(AdmissibilityFailure f) {
  switch (f) {
    case AdmissibilityFailure::None: return "none";
    case AdmissibilityFailure::FirstTimeSupport: return "first_time_support";
    case AdmissibilityFailure::TransitionPositivity: return "transition_positivity";
    case AdmissibilityFailure::InteriorTimeSupport: return "interior_time_support";
    case AdmissibilityFailure::TailCondition: return "tail_condition";
    case AdmissibilityFailure::Malformed: return "malformed";
  }
  return "unknown";
}

bool SupportOracle::contains(int i, double cumulative) const {
  return sys_.laws.at(i).in_support(cumulative, eta_);
}

bool SupportOracle::tail_meets(int i, double cumulative) const {
  return sys_.laws.at(i).tbar() > cumulative;
}

AdmissibilityReport is_admissible(const SwitchedSystem& sys, const HybridState& z, const ControlSequence& cs,
                                  double eta) {
  AdmissibilityReport r;
  r.tolerance = eta;
  auto fail = [&](AdmissibilityFailure f, int leg, std::string msg) {
    r.verdict = false;
    r.failing_condition = f;
    r.leg = leg;
    r.message = std::move(msg);
    return r;
  };
  if (cs.size() == 0 || cs.times.size() != cs.indices.size())
    return fail(AdmissibilityFailure::Malformed, 0, "control sequence is empty or ragged");
  for (size_t k = 0; k < cs.size(); ++k) {
    if (!(cs.times[k] > 0.0)) return fail(AdmissibilityFailure::Malformed, static_cast<int>(k) + 1, "nonpositive time");
    if (cs.indices[k] < 0 || cs.indices[k] >= sys.states())
      return fail(AdmissibilityFailure::Malformed, static_cast<int>(k) + 1, "index out of range");
  }
  if (cs.indices[0] != z.i)
    return fail(AdmissibilityFailure::FirstTimeSupport, 1, "first index differs from the starting state");

  SupportOracle oracle(sys, eta);
  const size_t m = cs.size();
  try {
    double a1 = cumulative_rate(sys, z, cs.times[0]);
    if (m == 1) {
      if (!oracle.tail_meets(z.i, a1)) return fail(AdmissibilityFailure::FirstTimeSupport, 1, "no support beyond s+s_1");
      r.verdict = true;
      return r;
    }
    if (!oracle.contains(z.i, a1)) return fail(AdmissibilityFailure::FirstTimeSupport, 1, "s+s_1 outside the support");
    CompositeFlowResult path = composite_flow(sys, cs, z.x);
    for (size_t k = 2; k <= m; ++k) {
      const Vec& xk = path.points[k - 1];
      int prev = cs.indices[k - 2];
      int cur = cs.indices[k - 1];
      if (!(sys.jump(xk)(prev, cur) > 0.0))
        return fail(AdmissibilityFailure::TransitionPositivity, static_cast<int>(k), "zero transition probability");
      double ak = cumulative_rate(sys, HybridState{xk, 0.0, cur}, cs.times[k - 1]);
      if (k < m && !oracle.contains(cur, ak))
        return fail(AdmissibilityFailure::InteriorTimeSupport, static_cast<int>(k), "interior time outside the support");
      if (k == m && !oracle.tail_meets(cur, ak))
        return fail(AdmissibilityFailure::TailCondition, static_cast<int>(k), "no support beyond the last time");
    }
  } catch (const Error& e) {
    return fail(AdmissibilityFailure::Malformed, e.leg().value_or(0), std::string(e.kind()) + ": " + e.what());
  }
  r.verdict = true;
  return r;
}

HybridState reach_endpoint(const SwitchedSystem& sys, const HybridState& z, const ControlSequence& cs) {
  AdmissibilityReport rep = is_admissible(sys, z, cs);
  if (!rep.verdict)
    throw NotAdmissible(std::string("control sequence is not admissible: ") + to_string(rep.failing_condition) +
                        " at leg " + std::to_string(rep.leg));
  Vec end = composite_flow(sys, cs, z.x).endpoint;
  double s_star = cs.size() == 1 ? z.s + cs.times[0] : cs.times.back();
  return HybridState{end, s_star, cs.indices.back()};
}

std::vector<int> witness_path(const Mat& q, int from, int to) {
  const int n = static_cast<int>(q.rows());
  // Breadth-first search over at most n+1 states; the path excludes both endpoints.
  if (q(from, to) > 0.0 && from != to) return {};
  std::vector<int> parent(n, -2);
  std::deque<int> queue;
  for (int j = 0; j < n; ++j)
    if (q(from, j) > 0.0) {
      parent[j] = -1;
      queue.push_back(j);
    }
  while (!queue.empty()) {
    int k = queue.front();
    queue.pop_front();
    if (q(k, to) > 0.0) {
      std::vector<int> path;
      for (int c = k; c != -1; c = parent[c]) path.push_back(c);
      std::reverse(path.begin(), path.end());
      if (static_cast<int>(path.size()) > n + 1) break;
      return path;
    }
    for (int j = 0; j < n; ++j)
      if (q(k, j) > 0.0 && parent[j] == -2) {
        parent[j] = k;
        queue.push_back(j);
      }
  }
  throw IrreducibilityPathNotFound("no positive path from state " + std::to_string(from) + " to " + std::to_string(to));
}

namespace {

struct Builder {
  const SwitchedSystem& sys;
  ControlSequence seq;
  Vec y;

  void push(int j, double t) {
    y = flow(sys, j, t, y);
    seq.indices.push_back(j);
    seq.times.push_back(t);
  }

  // Small admissible times along a witness path, total duration at most `budget`.
  void bridge(int from, int to, double budget) {
    std::vector<int> path = witness_path(sys.jump(y), from, to);
    if (path.empty()) return;
    double share = budget / static_cast<double>(path.size());
    int prev = from;
    for (int j : path) {
      Mat q = sys.jump(y);
      if (!(q(prev, j) > 0.0)) throw IrreducibilityPathNotFound("witness path lost positivity along the bridge");
      auto S = sys.laws[j].largest_support_point_below(sys.rates[j].lambda_min * share);
      if (!S) throw ZeroNotInSupport("no support point below the bridge budget");
      push(j, time_to_cumulative(sys, y, j, *S).time);
      prev = j;
    }
  }
};

}  // namespace

Algorithm1Result algorithm1(const SwitchedSystem& sys, const Vec& x, const ControlSequence& target, double epsilon,
                            const Algorithm1Options& opt) {
  target.validate();
  if (target.size() == 0) throw InvalidArgument("target control sequence is empty");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  for (int j = 0; j < sys.states(); ++j)
    if (!sys.laws[j].in_support(0.0, 0.0)) throw ZeroNotInSupport("0 is not in the support of law " + std::to_string(j));

  const size_t m = target.size();
  Algorithm1Result res;
  res.target = composite_flow(sys, target, x).endpoint;

  double T = 2.0 * target.total_time();
  ReplicaStream rng(opt.seed);
  LipschitzConstants lc = composite_lipschitz(sys.fields, CompactSet::ball(x, 1.0), T, rng, opt.lipschitz_samples,
                                              opt.safety, sys.flow_config);
  res.C = std::max(lc.C, 1e-12);
  res.L = lc.L;
  double h = epsilon / (static_cast<double>(m + 1) * res.C * std::exp(res.L * T));
  for (double s : target.times) h = std::min(h, 0.5 * s);
  const double lmin = sys.lambda_min();
  const double lmax = sys.lambda_max();

  for (int attempt = 0;; ++attempt) {
    Builder b{sys, {}, x};
    res.iterations.assign(m, 0);
    res.step_bounds.assign(m, 0);
    double smax = *std::max_element(target.times.begin(), target.times.end());
    long k = 1;
    for (size_t l = 0; l < m; ++l) {
      const int il = target.indices[l];
      auto S = sys.laws[il].largest_support_point_below(lmin * h);
      if (!S) throw ZeroNotInSupport("no support point below lambda_min * h");
      res.step_bounds[l] = static_cast<long>(std::ceil(smax * lmax / *S));
      double elapsed = 0.0;
      while (elapsed < target.times[l] - h) {
        double t = time_to_cumulative(sys, b.y, il, *S).time;
        b.push(il, t);
        if (elapsed + t < target.times[l] - h) b.bridge(il, il, h * std::ldexp(1.0, static_cast<int>(-std::min<long>(k, 1000))));
        ++k;
        elapsed += t;
        ++res.iterations[l];
      }
      if (l + 1 < m) {
        b.bridge(il, target.indices[l + 1], h * std::ldexp(1.0, static_cast<int>(-std::min<long>(k, 1000))));
        ++k;
      }
    }
    res.sequence = std::move(b.seq);
    res.endpoint = b.y;
    res.error = (res.endpoint - res.target).norm();
    res.step = h;
    res.refinements = attempt;
    if (res.error <= epsilon || attempt >= opt.max_refinements) break;
    h *= 0.5;
  }
  return res;
}

FixedPointResult fixed_point_1d(const VectorFieldSpec& lower, const VectorFieldSpec& upper, double t0, double t1,
                                double x_init, double tol, double lo, double hi, const FlowConfig& cfg) {
  if (lower.dim != 1 || upper.dim != 1) throw InvalidArgument("fixed_point_1d needs one-dimensional fields");
  if (!(t0 > 0.0) || !(t1 > 0.0)) throw InvalidArgument("t0 and t1 must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  auto at = [](const VectorFieldSpec& f, double v) { return f.rhs(Vec::Constant(1, v))[0]; };
  double scale = 1.0 + std::abs(at(lower, hi)) + std::abs(at(upper, lo));
  if (std::abs(at(lower, lo)) > 1e-9 * scale || std::abs(at(upper, hi)) > 1e-9 * scale)
    throw InvalidArgument("fields must vanish at the interval ends");
  for (int k = 0; k <= 10; ++k) {
    Vec p = Vec::Constant(1, lo + (hi - lo) * k / 10.0);
    if (!(jacobian(lower, p)(0, 0) < 0.0) || !(jacobian(upper, p)(0, 0) < 0.0))
      throw InvalidArgument("fields must be strictly decreasing on the interval");
  }
  FlowConfig tight = cfg;
  tight.abs_tol = std::min(cfg.abs_tol, 1e-13);
  tight.rel_tol = std::min(cfg.rel_tol, 1e-13);
  auto psi = [&](double v) {
    Vec p = flow(upper, t1, Vec::Constant(1, v), tight);
    return flow(lower, t0, p, tight)[0];
  };

  FixedPointResult r;
  double xk = x_init;
  r.iterates.push_back(xk);
  double ratio = 0.0;
  double prev_step = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < 100000; ++it) {
    double next = psi(xk);
    double step = std::abs(next - xk);
    if (std::isfinite(prev_step) && prev_step > 1e-8) ratio = std::max(ratio, step / prev_step);
    prev_step = step;
    xk = next;
    r.iterates.push_back(xk);
    r.iterations = it + 1;
    if (step < tol) break;
    if (!std::isfinite(xk)) throw NotContracting("iteration diverged");
  }
  double h = 1e-5 * std::max(1.0, std::abs(xk));
  double deriv = std::abs(psi(xk + h) - psi(xk - h)) / (2.0 * h);
  r.x = xk;
  r.contraction = std::max(deriv, ratio);
  if (!(r.contraction < 1.0)) throw NotContracting("empirical contraction factor is not below 1");
  return r;
}

AccessibleCandidate one_d_accessible_point(const SwitchedSystem& sys, int lower, int upper, double t0, double t1,
                                           int repetitions, double epsilon) {
  if (sys.dim != 1) throw InvalidArgument("one_d_accessible_point needs a one-dimensional system");
  if (repetitions < 1) throw InvalidArgument("repetitions must be positive");
  if (!(epsilon > 0.0) || !(epsilon < t1)) throw InvalidArgument("epsilon must lie in (0, t1)");
  double lo = 0.0, hi = 1.0;
  if (sys.compact) {
    lo = sys.compact->lower()[0];
    hi = sys.compact->upper()[0];
  }
  AccessibleCandidate c;
  c.fixed_point = fixed_point_1d(sys.fields.at(lower), sys.fields.at(upper), t0, t1, 0.5 * (lo + hi), 1e-13, lo, hi,
                                 sys.flow_config);
  Vec xs = Vec::Constant(1, c.fixed_point.x);
  SupportOracle oracle(sys);
  if (!oracle.contains(lower, cumulative_rate(sys, HybridState{xs, 0.0, lower}, t0)))
    throw InvalidArgument("t0 is not in the support of the lower-end law");
  if (!oracle.contains(upper, cumulative_rate(sys, HybridState{xs, 0.0, upper}, t1)))
    throw InvalidArgument("t1 is not in the support of the upper-end law");
  for (int k = 0; k < repetitions; ++k) {
    c.sequence.times.push_back(t1);
    c.sequence.indices.push_back(upper);
    c.sequence.times.push_back(t0);
    c.sequence.indices.push_back(lower);
  }
  c.sequence.times.push_back(epsilon);
  c.sequence.indices.push_back(upper);
  c.z = HybridState{xs, 0.0, upper};
  return c;
}

}  // namespace semiswitch
