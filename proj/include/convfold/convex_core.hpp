#pragma once

// Support-function queries on planar and spatial convex bodies.

#include <utility>

#include "convfold/geometry.hpp"

namespace convfold {

struct SupportResult {
  double value;
  std::size_t vertex;  // index of an attaining vertex
};

SupportResult support_point(const ConvexPolygon& k, const Direction2& omega);
SupportResult support_point(const ConvexPolytope& k, const Direction3& omega);

/// H_K(omega) = max <x, omega> over K. Throws EmptyBody on an empty body.
inline double support(const ConvexPolygon& k, const Direction2& omega) {
  return support_point(k, omega).value;
}
inline double support(const ConvexPolytope& k, const Direction3& omega) {
  return support_point(k, omega).value;
}

/// Distance between the two supporting lines (planes) normal to omega.
template <class Body, int N>
double breadth(const Body& k, const Direction<N>& omega) {
  return support(k, omega) + support(k, -omega);
}

struct WidthResult {
  double width;
  Direction2 direction;
};

/// Minimal breadth, computed by rotating calipers over edge normals.
///
/// Ties are broken towards the direction making the smallest angle with the positive
/// x-axis (directions are taken up to sign). Segments report their unique normal.
WidthResult width(const ConvexPolygon& k);

struct ShadowSection {
  Cut2 cut;               // section plane: normal is perpendicular to the width direction
  Segment2 chord;         // K intersected with the cut line, parallel to `width_direction`
  Direction2 width_direction;
  double width;
  bool projection_equals_section;
  double mismatch;        // max endpoint gap between projection and section
};

/// A chord realizing the width whose line is both a section and a shadow of K.
///
/// The cut normal is oriented so that lambda <= (H(w) - H(-w)) / 2 for w = cut normal.
ShadowSection shadow_section_for_min_breadth(const ConvexPolygon& k);

/// K intersected with the cut line. Throws NoIntersection when the line misses K.
Segment2 section(const ConvexPolygon& k, const Cut2& cut);
/// K intersected with the cut plane, as a planar polygon in R^3.
PlanarPolygon3 section(const ConvexPolytope& k, const Cut3& cut);

/// Orthogonal projection of K onto the line {<x, omega> = anchor}.
Segment2 project(const ConvexPolygon& k, const Direction2& omega, double anchor = 0.0);

/// Orthonormal basis of the plane normal to omega; for coordinate axes it returns the
/// remaining axes in increasing index order.
std::pair<Vec3, Vec3> plane_basis(const Direction3& omega);

/// Projection of K onto the plane normal to omega, in `plane_basis(omega)` coordinates.
ConvexPolygon project(const ConvexPolytope& k, const Direction3& omega);

/// Whether the section at `cut` equals the shadow of K along the cut normal, anchored
/// at the cut line. `mismatch` receives the larger endpoint discrepancy.
bool section_is_shadow(const ConvexPolygon& k, const Cut2& cut, double* mismatch = nullptr);

double distance(const Vec2& x, const ConvexPolygon& k);
double distance(const Vec3& x, const ConvexPolytope& k);
double distance_to_segment(const Vec3& x, const Vec3& a, const Vec3& b);
double distance_to_segment(const Vec2& x, const Vec2& a, const Vec2& b);

/// Hausdorff distance. For convex bodies the farthest point is a vertex.
double hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b);
double hausdorff_distance(const ConvexPolytope& a, const ConvexPolytope& b);

/// K intersected with {<x, omega> >= lambda}; possibly empty or degenerate.
ConvexPolygon clip_above(const ConvexPolygon& k, const Cut2& cut);
/// K intersected with {<x, omega> <= lambda}.
ConvexPolygon clip_below(const ConvexPolygon& k, const Cut2& cut);

}  // namespace convfold
