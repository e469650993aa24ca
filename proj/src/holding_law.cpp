#include "semiswitch/holding_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "semiswitch/errors.hpp"

namespace semiswitch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double component_survival(const HoldingLaw::Component& c, double t) {
  switch (c.kind) {
    case HoldingLaw::Kind::Exponential:
      return t <= 0.0 ? 1.0 : std::exp(-c.a * t);
    case HoldingLaw::Kind::Uniform:
      if (t <= c.a) return 1.0;
      if (t >= c.b) return 0.0;
      return (c.b - t) / (c.b - c.a);
    case HoldingLaw::Kind::Atom:
      return t < c.a ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

HoldingLaw HoldingLaw::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("exponential rate must be positive");
  HoldingLaw law;
  law.components_.push_back({Kind::Exponential, 1.0, rate, 0.0});
  law.finalize();
  return law;
}

HoldingLaw HoldingLaw::uniform(double a, double b) {
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
    throw InvalidArgument("uniform law needs 0 <= a < b < inf");
  HoldingLaw law;
  law.components_.push_back({Kind::Uniform, 1.0, a, b});
  law.finalize();
  return law;
}

HoldingLaw HoldingLaw::dirac(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("dirac location must be positive");
  HoldingLaw law;
  law.components_.push_back({Kind::Atom, 1.0, t, t});
  law.finalize();
  return law;
}

HoldingLaw HoldingLaw::atoms(const std::vector<std::pair<double, double>>& tw) {
  if (tw.empty()) throw InvalidArgument("atom mixture needs at least one atom");
  double total = 0.0;
  for (auto [t, w] : tw) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("atom locations must be positive");
    if (!(w >= 0.0)) throw InvalidArgument("atom weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("atom weights sum to zero");
  HoldingLaw law;
  for (auto [t, w] : tw)
    if (w > 0.0) law.components_.push_back({Kind::Atom, w / total, t, t});
  law.finalize();
  return law;
}

HoldingLaw HoldingLaw::table(const std::vector<double>& t, const std::vector<double>& G) {
  if (t.empty() || t.size() != G.size()) throw InvalidArgument("table law needs matching t and G");
  std::vector<std::pair<double, double>> tw;
  double prev = 1.0;
  for (size_t k = 0; k < t.size(); ++k) {
    if (k > 0 && !(t[k] > t[k - 1])) throw InvalidArgument("table times must increase strictly");
    if (!(G[k] <= prev + 1e-15) || G[k] < 0.0) throw InvalidArgument("table survival must be nonincreasing in [0,1]");
    double mass = prev - G[k];
    if (mass > 0.0) {
      if (!(t[k] > 0.0)) throw InvalidArgument("table law puts mass at 0");
      tw.emplace_back(t[k], mass);
    }
    prev = G[k];
  }
  if (G.back() != 0.0) throw InvalidArgument("table survival must end at 0");
  return atoms(tw);
}

HoldingLaw HoldingLaw::mixture(const std::vector<std::pair<double, HoldingLaw>>& parts) {
  double total = 0.0;
  for (const auto& [w, law] : parts) {
    if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("mixture weights sum to zero");
  HoldingLaw out;
  for (const auto& [w, law] : parts)
    for (auto c : law.components_) {
      c.weight *= w / total;
      if (c.weight > 0.0) out.components_.push_back(c);
    }
  out.finalize();
  return out;
}

void HoldingLaw::finalize() {
  std::vector<SupportPiece> pieces;
  for (const auto& c : components_) {
    switch (c.kind) {
      case Kind::Exponential: pieces.push_back({0.0, kInf}); break;
      case Kind::Uniform: pieces.push_back({c.a, c.b}); break;
      case Kind::Atom: pieces.push_back({c.a, c.a}); break;
    }
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const SupportPiece& p, const SupportPiece& q) { return p.lo < q.lo || (p.lo == q.lo && p.hi < q.hi); });
  support_.clear();
  for (const auto& p : pieces) {
    if (!support_.empty() && p.lo <= support_.back().hi) {
      support_.back().hi = std::max(support_.back().hi, p.hi);
    } else {
      support_.push_back(p);
    }
  }
}

double HoldingLaw::survival(double t) const {
  double g = 0.0;
  for (const auto& c : components_) g += c.weight * component_survival(c, t);
  return std::clamp(g, 0.0, 1.0);
}

double HoldingLaw::survival_left(double t) const {
  double g = 0.0;
  for (const auto& c : components_) {
    if (c.kind == Kind::Atom) g += c.weight * (c.a >= t ? 1.0 : 0.0);
    else g += c.weight * component_survival(c, t);
  }
  return std::clamp(g, 0.0, 1.0);
}

bool HoldingLaw::has_density() const {
  return std::any_of(components_.begin(), components_.end(),
                     [](const Component& c) { return c.kind != Kind::Atom; });
}

bool HoldingLaw::has_atoms() const {
  return std::any_of(components_.begin(), components_.end(),
                     [](const Component& c) { return c.kind == Kind::Atom; });
}

std::optional<double> HoldingLaw::density(double t) const {
  if (!has_density()) return std::nullopt;
  double g = 0.0;
  for (const auto& c : components_) {
    if (c.kind == Kind::Exponential && t >= 0.0) g += c.weight * c.a * std::exp(-c.a * t);
    if (c.kind == Kind::Uniform && t >= c.a && t <= c.b) g += c.weight / (c.b - c.a);
  }
  return g;
}

double HoldingLaw::tbar() const {
  double t = 0.0;
  for (const auto& c : components_) {
    if (c.kind == Kind::Exponential) return kInf;
    t = std::max(t, c.kind == Kind::Uniform ? c.b : c.a);
  }
  return t;
}

std::vector<double> HoldingLaw::atom_locations() const {
  std::vector<double> out;
  for (const auto& c : components_)
    if (c.kind == Kind::Atom) out.push_back(c.a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> HoldingLaw::breakpoints() const {
  std::vector<double> out;
  for (const auto& c : components_) {
    if (c.kind == Kind::Uniform) {
      out.push_back(c.a);
      out.push_back(c.b);
    } else if (c.kind == Kind::Atom) {
      out.push_back(c.a);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool HoldingLaw::in_support(double t, double eta) const {
  for (const auto& p : support_)
    if (t >= p.lo - eta && t <= p.hi + eta) return true;
  return false;
}

std::optional<double> HoldingLaw::largest_support_point_below(double limit) const {
  std::optional<double> best;
  for (const auto& p : support_) {
    if (p.lo > limit) continue;
    double cand = std::min(p.hi, limit);
    if (cand > 0.0 && (!best || cand > *best)) best = cand;
  }
  return best;
}

double HoldingLaw::quantile(double target) const {
  if (target >= 1.0) return 0.0;
  if (!(target > 0.0)) return tbar();
  if (components_.size() == 1) {
    const auto& c = components_.front();
    switch (c.kind) {
      case Kind::Exponential: return -std::log(target) / c.a;
      case Kind::Uniform: return c.b - target * (c.b - c.a);
      case Kind::Atom: return c.a;
    }
  }
  if (!has_density()) {
    // Tail sums from the top: G(a_k) is the mass strictly above a_k.
    std::vector<std::pair<double, double>> raw;
    for (const auto& c : components_) raw.emplace_back(c.a, c.weight);
    std::sort(raw.begin(), raw.end());
    std::vector<std::pair<double, double>> at;
    for (auto [t, w] : raw) {
      if (!at.empty() && at.back().first == t) at.back().second += w;
      else at.emplace_back(t, w);
    }
    std::vector<double> above(at.size(), 0.0);
    double acc = 0.0;
    for (size_t k = at.size(); k-- > 0;) {
      above[k] = acc;
      acc += at[k].second;
    }
    for (size_t k = 0; k < at.size(); ++k)
      if (above[k] <= target) return at[k].first;
    return at.back().first;
  }
  double hi = tbar();
  if (!std::isfinite(hi)) {
    hi = 1.0;
    while (survival(hi) > target) hi *= 2.0;
  }
  double lo = 0.0;
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (survival(mid) <= target) hi = mid;
    else lo = mid;
  }
  for (double b : breakpoints())
    if (b < hi && hi - b <= 1e-9 && survival(b) <= target) hi = b;
  return hi;
}

ExpDecay HoldingLaw::exp_decay() const {
  if (declared_decay_) return *declared_decay_;
  double beta = kInf;
  bool compact = false;
  for (const auto& c : components_) {
    if (c.kind == Kind::Exponential) beta = std::min(beta, c.a);
    else compact = true;
  }
  if (compact) beta = std::min(beta, 1.0);
  double C = 0.0;
  for (const auto& c : components_) {
    if (c.kind == Kind::Exponential) C += c.weight;
    else C += c.weight * std::exp(beta * (c.kind == Kind::Uniform ? c.b : c.a));
  }
  return {std::max(C, 1.0), beta};
}

std::string HoldingLaw::describe() const {
  std::ostringstream os;
  if (components_.size() == 1) {
    const auto& c = components_.front();
    switch (c.kind) {
      case Kind::Exponential: os << "exponential(" << c.a << ")"; break;
      case Kind::Uniform: os << "uniform[" << c.a << "," << c.b << "]"; break;
      case Kind::Atom: os << "dirac(" << c.a << ")"; break;
    }
    return os.str();
  }
  os << "mixture of " << components_.size() << " parts";
  return os.str();
}

}  // namespace semiswitch
