#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semiswitch {

// Closed support piece; lo == hi marks an atom.
struct SupportPiece {
  double lo = 0.0;
  double hi = 0.0;
  bool is_atom() const { return lo == hi; }
};

struct ExpDecay {
  double C = 1.0;
  double beta = 1.0;
};

// Holding-time law on (0, inf) as a weighted mixture of exponential, uniform and atomic parts.
class HoldingLaw {
 public:
  enum class Kind { Exponential, Uniform, Atom };
  struct Component {
    Kind kind;
    double weight;
    double a;  // rate, lower end, or atom location
    double b;  // upper end for uniform
  };

  static HoldingLaw exponential(double rate);
  static HoldingLaw uniform(double a, double b);
  static HoldingLaw dirac(double t);
  static HoldingLaw atoms(const std::vector<std::pair<double, double>>& locations_weights);
  // Right-continuous steps: G = 1 before t[0], G[k] on [t[k], t[k+1]).
  static HoldingLaw table(const std::vector<double>& t, const std::vector<double>& G);
  static HoldingLaw mixture(const std::vector<std::pair<double, HoldingLaw>>& parts);

  double survival(double t) const;       // mu(t, inf)
  double survival_left(double t) const;  // mu[t, inf)
  std::optional<double> density(double t) const;
  bool has_density() const;
  bool has_atoms() const;
  double tbar() const;
  double sup_support() const { return tbar(); }
  const std::vector<SupportPiece>& support() const { return support_; }
  std::vector<double> atom_locations() const;
  // Points where G is not smooth: support ends and atoms.
  std::vector<double> breakpoints() const;
  bool in_support(double t, double eta) const;
  // Largest support point in [0, limit], if any.
  std::optional<double> largest_support_point_below(double limit) const;

  // inf{a >= 0 : G(a) <= target} for target in (0, 1].
  double quantile(double target) const;

  ExpDecay exp_decay() const;
  void set_exp_decay(ExpDecay d) { declared_decay_ = d; }

  const std::vector<double>& regular_points() const { return regular_points_; }
  void set_regular_points(std::vector<double> pts) { regular_points_ = std::move(pts); }

  const std::vector<Component>& components() const { return components_; }
  std::string describe() const;

 private:
  void finalize();
  std::vector<Component> components_;
  std::vector<SupportPiece> support_;
  std::vector<double> regular_points_;
  std::optional<ExpDecay> declared_decay_;
};

}  // namespace semiswitch
