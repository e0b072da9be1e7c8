#pragma once

// Concavity transforms of solutions, hypothesis checks on f, and the comparison experiments.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "convfold/plap_solver.hpp"

namespace convfold {

enum class TransformKind { Log, Phi, PowerConcavity };

/// A strictly increasing map applied to solution values, with its inverse.
class TransformSpec {
 public:
  TransformSpec(TransformKind kind, double p, std::function<double(double)> fwd, std::function<double(double)> inv,
                bool closed_form, std::string formula)
      : kind_(kind), p_(p), fwd_(std::move(fwd)), inv_(std::move(inv)), closed_form_(closed_form),
        formula_(std::move(formula)) {}

  double operator()(double t) const { return fwd_(t); }
  double inverse(double s) const { return inv_(s); }
  TransformKind kind() const { return kind_; }
  double p() const { return p_; }
  bool closed_form() const { return closed_form_; }
  const std::string& formula() const { return formula_; }

 private:
  TransformKind kind_;
  double p_;
  std::function<double(double)> fwd_, inv_;
  bool closed_form_;
  std::string formula_;
};

/// phi(t) = integral from 1 to t of F^(-1/p). Closed form for torsion and power reactions,
/// tanh-sinh quadrature otherwise. Throws DivergentIntegral when F^(-1/p) is not integrable at 0.
TransformSpec phi_transform(const Reaction& reaction);
TransformSpec log_transform();
/// u^(1 - 1/p).
TransformSpec power_concavity_transform(double p);

/// Applies the transform nodewise. Nodes with u <= 0 map to the transform's limit at 0.
ScalarField apply_transform(const ScalarField& u, const TransformSpec& tr);

struct HypothesisCheck {
  std::string name;
  bool holds = false;
  double worst_violation = 0;  // relative, 0 when the condition holds everywhere
  double worst_at = 0;         // t where the worst violation occurs
};

struct HypothesisReport {
  int n_points = 0;
  double t_min = 0, t_max = 0;
  HypothesisCheck ratio_nonincreasing;  // f(t) / t^(p-1)
  HypothesisCheck exp_ratio_convex;     // e^((p-1)s) / f(e^s) in s
  HypothesisCheck root_concave;         // F^(1/p)
  HypothesisCheck quotient_convex;      // F / f
  std::vector<const HypothesisCheck*> all() const {
    return {&ratio_nonincreasing, &exp_ratio_convex, &root_concave, &quotient_convex};
  }
};

/// Samples the four conditions on a log-spaced grid of n points in [1e-6, 1e3] * scale.
HypothesisReport check_hypotheses(const Reaction& reaction, int n_points = 10000, double scale = 1.0);

struct QuasiConcavityReport {
  int n_levels = 0;
  double tolerance = 0;
  double worst_defect = 0;
  double worst_level = 0;
  int max_components = 0;
  bool passed = false;
};

QuasiConcavityReport check_quasiconcave(const ScalarField& u, int n_levels = 20, double defect_tol = 1e-3);

struct CriticalReport {
  std::vector<Vec2> centers;
  std::vector<double> radii;
  int count = 0;
  double cluster_distance = 0;  // 3h
  double grad_threshold = 0;    // relative to max |grad u|
  int low_gradient_clusters = 0;  // clusters of interior triangles with small gradient
  double argmax_epsilon = 0;
  double argmax_diameter = 0;
};

/// Local maxima over node stencils, merged within 3h.
CriticalReport count_critical_points(const ScalarField& u, double grad_threshold = 0.02,
                                     double argmax_epsilon_rel = 1e-5);

struct ConcavityOptions {
  int n_segments = 10000;
  std::uint64_t seed = 7;
  double min_length_factor = 4.0;  // times h; shorter segments sit below interpolation precision
  double margin_factor = 2.0;      // endpoints at least this many h inside the domain
  double gap_threshold = 1e-12;    // strictness, relative to max |v|
  double concave_tol = 1e-9;       // plain concavity, relative to max |v|
};

struct ConcavityReport {
  int n_segments = 0;
  std::uint64_t seed = 0;
  int rejected = 0;
  double min_gap = 0;
  double min_normalized_gap = 0;  // gap / |x - y|^2
  Vec2 worst_x = Vec2::Zero(), worst_y = Vec2::Zero();
  double scale = 0;
  bool strict = false;
  bool concave = false;
};

/// Midpoint gaps v((x+y)/2) - (v(x)+v(y))/2 on seeded random segments of the domain.
ConcavityReport check_strict_concavity(const std::function<double(const Vec2&)>& v, const ConvexPolygon& domain,
                                       double h, const ConcavityOptions& options = {});
/// Same, with v interpolated linearly on its mesh.
ConcavityReport check_strict_concavity(const ScalarField& v, const ConcavityOptions& options = {});

struct PiconeReport {
  double p = 2;
  int triangles = 0;
  double min_slack = 0;       // min over triangles of RHS - LHS
  double min_relative_slack = 0;
  double max_relative_slack = 0;
  double integral_slack = 0;  // sum |T| (RHS - LHS)
  bool nonnegative = false;   // min slack >= -tol
  bool equality = false;      // relative slack ~ 0 on every triangle
};

/// |grad w|^p - |grad v|^(p-2) grad v . grad(w^p / v^(p-1)) per triangle of interior nodes.
/// Throws NonPositiveField if v or w is not positive at an interior node.
PiconeReport picone_check(const ScalarField& v, const ScalarField& w, double p, double tol = 1e-9);

struct ReflectionReport {
  double level = 0;
  double max_u = 0;
  double defect = 0;
  Vec2 width_direction = Vec2::UnitX();
  Vec2 cut_normal = Vec2::UnitY();  // omega_t perp
  double lambda = 0;
  double mu = 0;
  double breadth_perp = 0;
  bool fold_verified = false;
  int points_checked = 0;
  double min_difference = 0;  // min of u(T x) - u(x) over the cap
  Vec2 worst_point = Vec2::Zero();
  double tolerance = 0;
  bool comparison_holds = false;
  ConvexPolygon level_body;
  ConvexPolygon cap_body;
};

/// Folds the cap {<x, omega_t perp> >= mu_t} of the level set {u >= t} and compares u(T x)
/// with u(x). Throws FoldFailed when the fold leaves the level set.
ReflectionReport reflection_comparison_experiment(const ScalarField& u, double t, double tol = 1e-3);

}  // namespace convfold
