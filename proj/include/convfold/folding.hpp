#pragma once

// Reflections, caps, foldability and the maximal folding height.

#include <string>
#include <vector>

#include "convfold/convex_core.hpp"

namespace convfold {

/// T(x) = x - 2 omega (<omega, x> - lambda).
template <int N>
typename Direction<N>::Vector reflect(const typename Direction<N>::Vector& x, const Cut<N>& cut) {
  return x - 2.0 * cut.omega.vector() * (cut.omega.vector().dot(x) - cut.lambda);
}
inline Vec2 reflect(const Vec2& x, const Cut2& cut) { return reflect<2>(x, cut); }
inline Vec3 reflect(const Vec3& x, const Cut3& cut) { return reflect<3>(x, cut); }

/// The part of K with <x, omega> >= lambda. May be empty or degenerate.
ConvexPolygon cap(const ConvexPolygon& k, const Cut2& cut);
ConvexPolytope cap(const ConvexPolytope& k, const Cut3& cut);

/// Whether the reflected cap lies in K, vertex by vertex, with tolerance 1e-9 diam(K).
bool is_foldable(const ConvexPolygon& k, const Cut2& cut);
bool is_foldable(const ConvexPolytope& k, const Cut3& cut);

template <int N>
struct FoldProfile {
  Direction<N> omega;
  double lambda_min;  // smallest foldable offset
  double height;      // H_K(omega) - lambda_min
};
using FoldProfile2 = FoldProfile<2>;
using FoldProfile3 = FoldProfile<3>;

/// Bisection on lambda over [-H(-omega), H(omega)] with 60 halvings.
FoldProfile2 folding_profile(const ConvexPolygon& k, const Direction2& omega);
FoldProfile3 folding_profile(const ConvexPolytope& k, const Direction3& omega);

/// n angles 2 pi i / n.
std::vector<Direction2> uniform_directions(int n);
/// Fibonacci lattice on the sphere.
std::vector<Direction3> fibonacci_directions(int n);

struct HeartApprox2 {
  int directions_used = 0;
  ConvexPolygon body;
  std::vector<FoldProfile2> profiles;
  bool contains(const Vec2& x, double tol) const;
};

struct HeartApprox3 {
  int directions_used = 0;
  ConvexPolytope body;
  std::vector<FoldProfile3> profiles;
  ConvexPolytope domain;
  /// Membership in K and in every halfspace <x, omega> <= lambda_min(omega), up to tol.
  bool contains(const Vec3& x, double tol) const;
};

/// Outer approximation of the heart: K cut by {<x, omega> <= lambda_min(omega)}.
HeartApprox2 heart(const ConvexPolygon& k, int n_directions = 720);
HeartApprox3 heart(const ConvexPolytope& k, int n_directions = 5000);

struct LemmaFoldReport {
  double lambda = 0;
  double h_plus = 0;    // H_K(omega)
  double h_minus = 0;   // H_K(-omega)
  double breadth = 0;
  double f_plus = 0;    // F_K(omega)
  double f_minus = 0;   // F_K(-omega)
  double quarter_breadth = 0;
  bool bound_holds = false;
  bool claim_caps_foldable = false;  // caps at (H + lambda)/2 on both sides
  bool media_holds = false;          // lambda <= (H(omega) - H(-omega)) / 2
  double mu = 0;
  bool mu_foldable = false;
  bool mu_margin_holds = false;      // mu >= lambda + B/4
  bool passed = false;
};

/// Checks max{F(omega), F(-omega)} >= B(omega)/4 and the mu-fold. Throws NotAShadow when
/// the section at `cut` is not the shadow of K along its normal.
LemmaFoldReport lemma_fold_check(const ConvexPolygon& k, const Cut2& cut, double tol = 1e-9);

struct RectangleReport {
  bool rectangle = false;     // the half-slab is a rectangle aligned with omega
  double f_bar = 0;           // F of the cap at omega_bar
  double worst_slack = 0;     // min over |theta| of max(F(+theta), F(-theta)) - (f_bar - eps(theta))
  double worst_angle = 0;
  double near_min_ratio = 1;  // the better side's F / f_bar over the innermost angles
  int samples = 0;
  bool surrogate_holds = false;
  bool two_sided_holds = false;  // both tilt signs stay above the floor
  bool passed = false;
  std::string note;
};

/// Finite-angle surrogate for the rigidity statement. When the half-slab is not a rectangle,
/// checks that for every sampled 0 < |theta| < delta at least one of the tilts +-theta keeps
/// F_cap >= F_cap(omega_bar) - tol - 2 diam |theta|. The two-sided variant is reported too.
RectangleReport rectangle_rigidity_check(const ConvexPolygon& k, const Cut2& cut, double delta,
                                         int n_samples = 64);

}  // namespace convfold
