#pragma once

// Finite-element solver for -Delta_p u = f(u), u = 0 on the boundary of a convex polygon.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "convfold/convex_core.hpp"
#include "convfold/mesh.hpp"

namespace convfold {

struct Reaction {
  enum class Kind { Torsion, Power, Tabulated };

  Kind kind = Kind::Torsion;
  double p = 2.0;
  double c = 1.0;  // Power: f(t) = c t^(q-1)
  double q = 1.0;
  std::vector<double> table_t;  // Tabulated: increasing abscissae, f linear in between
  std::vector<double> table_f;

  static Reaction torsion(double p);
  static Reaction power(double p, double c, double q);
  static Reaction tabulated(double p, std::vector<double> t, std::vector<double> f);

  double f(double t) const;
  /// Primitive F(t) = integral of f from 0 to t.
  double F(double t) const;
  /// Throws InvalidReaction unless p > 1 and the kind-specific constraints hold.
  void validate() const;
  std::string name() const;
};

struct SolveOptions {
  int max_iterations = 400;       // per continuation stage
  double energy_tol = 1e-10;      // relative energy decrease over the last iteration
  double residual_tol = 1e-6;     // discrete residual, relative to the L2 norm of f(u)
  std::vector<double> eps_factors{1e-2, 1e-4, 1e-8};  // times the initial gradient scale
  double max_p_step = 0.5;        // continuation in p starting from p = 2
};

struct SolveStage {
  double p = 2;
  double eps = 0;
  int iterations = 0;
  double energy = 0;
  double max_u = 0;
  double residual = 0;
  bool converged = false;
  std::vector<double> energy_history;  // accepted iterates, nonincreasing
};

struct SolveDiagnostics {
  double gradient_scale = 0;
  int iterations = 0;
  double energy = 0;
  double rel_decrease = 0;
  double residual = 0;        // relative
  bool converged = false;
  std::vector<SolveStage> stages;
  /// Change of max u between the last two regularization stages, the proxy for eps -> 0.
  double eps_limit_change = 0;
};

struct Solution {
  ScalarField u;
  Reaction reaction;
  SolveDiagnostics diagnostics;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, Solution last)
      : Error(ErrorKind::NonConvergence, what), last_(std::move(last)) {}
  const Solution& last_iterate() const noexcept { return last_; }

 private:
  Solution last_;
};

/// Requires a nondegenerate domain and h < diam / 10.
Solution solve(const ConvexPolygon& domain, const Reaction& reaction, double h, const SolveOptions& options = {});
Solution solve_on_mesh(std::shared_ptr<const Mesh> mesh, const Reaction& reaction, const SolveOptions& options = {});

/// Discrete energy sum_T |T| (eps^2 + |grad u|^2)^(p/2) / p - sum_i m_i F(u_i).
double discrete_energy(const ScalarField& u, const Reaction& reaction, double eps = 0.0);

/// Radial solution on the unit disk.
class RadialProfile {
 public:
  RadialProfile(double p, std::function<double(double)> u) : p_(p), u_(std::move(u)) {}
  double operator()(double r) const { return u_(r); }
  double center() const { return u_(0.0); }
  double p() const { return p_; }

 private:
  double p_;
  std::function<double(double)> u_;
};

/// Closed form for torsion, shooting plus scaling for power reactions.
/// Throws UnsupportedReaction for tabulated reactions.
RadialProfile radial_oracle(const Reaction& reaction);

struct LevelSet {
  double level = 0;
  ConvexPolygon hull;   // convexified region {u >= level}
  double area = 0;      // exact area of the piecewise-linear super-level set
  double hull_area = 0;
  double defect = 0;    // 1 - area / hull_area
  bool convex = false;  // defect below the tolerance
  std::vector<std::vector<Vec2>> contours;  // oriented with the super-level set on the left
  std::vector<bool> closed;
};

/// Contour of the interpolated field at level t. Throws EmptyLevel when t >= max u.
LevelSet level_set(const ScalarField& u, double t, double defect_tol = 1e-3);

struct ArgmaxSet {
  double epsilon = 0;
  bool whole_domain = false;
  LevelSet level;
  double diameter = 0;
  double width = 0;           // B(omega_t)
  Vec2 width_direction = Vec2::UnitX();
  double breadth_perp = 0;    // B(omega_t perp)
  double alpha_ratio = 0;     // width / diameter
  double beta_ratio = 0;      // breadth_perp / diameter
  bool alpha_beta_condition = false;  // alpha^2 + (3 beta / 4)^2 < 1
};

/// Super-level set at max u - epsilon with its breadth diagnostics. Throws InvalidConfig
/// for epsilon <= 0.
ArgmaxSet argmax_set(const ScalarField& u, double epsilon, double defect_tol = 1e-3);

}  // namespace convfold
