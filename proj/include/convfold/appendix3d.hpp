#pragma once

// The tetrahedron family K^alpha and its folding, heart and sequence checks.

#include <string>
#include <vector>

#include "convfold/folding.hpp"

namespace convfold {

struct KAlphaSpec {
  double alpha = 0.05;
  double scale = 1.0;
  Vec3 offset = Vec3::Zero();
};

/// K^alpha = {|x3| <= alpha x1, |x2| <= alpha (1 - x1)}, scaled by l and translated.
/// Throws InvalidAlpha for alpha <= 0.
ConvexPolytope build_kalpha(const KAlphaSpec& spec);

/// The vertices z1..z4 of the unscaled body.
std::vector<Vec3> kalpha_vertices(double alpha);

/// The three generating symmetries of the unscaled body, as affine maps.
Vec3 kalpha_symmetry(int which, const Vec3& x);

struct FoldingBoundReport {
  double alpha = 0;
  double scale = 1;
  int n_directions = 0;
  double bound = 0;         // 2 alpha l
  double max_height = 0;
  Vec3 worst_direction = Vec3::Zero();
  double floor_height = 0;  // height at the explicit fold normal to (0,1,0)
  bool floor_holds = false; // floor_height >= alpha l / 2
  bool passed = false;
};

FoldingBoundReport verify_folding_bound(const KAlphaSpec& spec, int n_directions = 5000, double tol = 1e-6);

struct TbarReport {
  double alpha = 0;
  int n_directions = 0;
  double bound = 0;             // alpha (sqrt(2 alpha^2 + 1) - alpha)
  int caps_checked = 0;         // foldable maximal caps containing z1
  int caps_meeting_axis = 0;
  double max_sup = 0;           // largest sup{t : (t,0,0) in cap}, in units of l
  Vec3 worst_direction = Vec3::Zero();
  bool untested_alpha = false;  // alpha above the small-alpha range of the corpus
  bool passed = false;
};

/// Sup of the x1-axis parameter t over the cap {<x, omega> >= lambda} of the given body,
/// with the axis point offset + l (t, 0, 0), t in [0, 1]. Returns -inf for an empty meet.
double cap_axis_sup(const KAlphaSpec& spec, const Cut3& cut);

TbarReport verify_tbar_bound(const KAlphaSpec& spec, int n_directions = 5000, double tol = 1e-9);

struct HeartSegmentReport {
  double alpha = 0;
  int n_directions = 0;
  int n_points = 0;
  int points_removed = 0;      // segment points cut off by some maximal foldable cap
  double min_margin = 0;       // min over directions and points of lambda_min - <x, omega>
  bool apex_removed = false;   // (0,0,0) lies in some foldable cap
  bool heart_body_contains_segment = false;
  bool passed = false;
};

HeartSegmentReport verify_heart_segment(const KAlphaSpec& spec, int n_directions = 5000, int n_points = 101,
                                        double tol = 1e-9);

struct SequenceReport {
  int n = 0;
  double l = 0;
  double alpha = 0;
  double constraint = 0;     // l (1 - 4 alpha l), at least 1
  double hausdorff = 0;      // distance to the unit segment
  double hausdorff_bound = 0;  // C / n with C = 1
  int n_directions = 0;
  int foldable_caps_meeting_segment = 0;
  double min_margin = 0;     // min over directions of lambda_min - max over segment of <x, omega>
  bool heart_contains_segment = false;
  bool passed = false;
};

/// K_n = (-2 alpha_n l_n, 0, 0) + l_n K^{alpha_n} with l_n = 1 + 1/n, alpha_n = (l_n - 1) / (4 l_n^2).
ConvexPolytope build_sequence_body(int n, double* l_out = nullptr, double* alpha_out = nullptr);
SequenceReport build_sequence_example(int n, int n_directions = 5000);

/// Wavefront OBJ text of a polytope (one polygon per facet).
std::string polytope_to_obj(const ConvexPolytope& k);

}  // namespace convfold
