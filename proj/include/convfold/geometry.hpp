#pragma once

// Value types for planar and spatial convex bodies.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "convfold/errors.hpp"

namespace convfold {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Unit vector in R^N. Construction normalizes; the zero vector is rejected.
template <int N>
class Direction {
 public:
  using Vector = Eigen::Matrix<double, N, 1>;

  explicit Direction(const Vector& v) : v_(v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorKind::InvalidBody, "direction must be a finite nonzero vector");
    }
    v_ /= n;
  }

  const Vector& vector() const noexcept { return v_; }
  double operator[](int i) const { return v_[i]; }
  Direction operator-() const { return Direction(-v_); }

 private:
  Vector v_;
};

using Direction2 = Direction<2>;
using Direction3 = Direction<3>;

inline Direction2 direction_from_angle(double theta) {
  return Direction2(Vec2(std::cos(theta), std::sin(theta)));
}

/// Counterclockwise rotation by a right angle.
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }
inline Direction2 perp(const Direction2& d) { return Direction2(perp(d.vector())); }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// The hyperplane {x : <x, omega> = lambda} together with its upper halfspace and reflection.
template <int N>
struct Cut {
  double lambda;
  Direction<N> omega;

  Cut(double lambda_, Direction<N> omega_) : lambda(lambda_), omega(omega_) {}

  double signed_distance(const typename Direction<N>::Vector& x) const {
    return x.dot(omega.vector()) - lambda;
  }
  Cut flipped() const { return Cut(-lambda, -omega); }
};

using Cut2 = Cut<2>;
using Cut3 = Cut<3>;

struct Segment2 {
  Vec2 a;
  Vec2 b;
  double length() const { return (b - a).norm(); }
};

/// Compact convex subset of the plane stored as a counterclockwise vertex loop.
///
/// Degenerate bodies are first-class: zero vertices is the empty set, one vertex a
/// point, two vertices a segment. Three or more vertices always enclose positive area.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  /// Validates a counterclockwise convex loop. Throws InvalidBody otherwise.
  explicit ConvexPolygon(std::vector<Vec2> ccw_vertices);

  /// Convex hull of an arbitrary point cloud (collinear and duplicate points dropped).
  static ConvexPolygon hull(const std::vector<Vec2>& points);
  static ConvexPolygon segment(const Vec2& a, const Vec2& b);
  static ConvexPolygon point(const Vec2& p);

  const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  bool empty() const noexcept { return vertices_.empty(); }
  bool is_degenerate() const noexcept { return vertices_.size() < 3; }
  const Vec2& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

  double area() const;
  double diameter() const;
  Vec2 centroid() const;
  /// Containment tolerance scale: 1e-9 * max(diam, tiny).
  double tolerance() const;

  /// Signed distance is >= -tol for every edge when x is inside.
  bool contains(const Vec2& x, double tol) const;
  bool contains(const Vec2& x) const { return contains(x, tolerance()); }

  ConvexPolygon translated(const Vec2& t) const;
  ConvexPolygon scaled(double s) const;

 private:
  struct Unchecked {};
  ConvexPolygon(std::vector<Vec2> v, Unchecked) : vertices_(std::move(v)) {}

  std::vector<Vec2> vertices_;
};

/// Planar convex polygon embedded in R^3.
struct PlanarPolygon3 {
  std::vector<Vec3> loop;
  Vec3 normal = Vec3::UnitZ();
};

/// Compact convex polytope in R^3 with both vertex and facet descriptions.
///
/// Facets carry an outward unit normal, an offset and the vertex loop of the facet
/// (counterclockwise seen from outside). A polytope whose clip collapsed to a
/// lower-dimensional set keeps its vertex cloud and has no facets.
class ConvexPolytope {
 public:
  struct Face {
    Vec3 normal;
    double offset;
    std::vector<Vec3> loop;
  };

  ConvexPolytope() = default;

  /// Axis-aligned box [lo, hi].
  static ConvexPolytope box(const Vec3& lo, const Vec3& hi);
  /// Intersection of halfspaces n.x <= d, cut out of a bounding box that must contain it.
  static ConvexPolytope from_halfspaces(const std::vector<std::pair<Vec3, double>>& halfspaces,
                                        const Vec3& box_lo, const Vec3& box_hi);
  /// Convex hull of a point cloud; coplanar clouds give a degenerate body.
  static ConvexPolytope hull(const std::vector<Vec3>& points);
  /// Lower-dimensional body described by points only (segment, flat polygon).
  static ConvexPolytope degenerate(std::vector<Vec3> points);

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  bool empty() const noexcept { return vertices_.empty(); }
  bool is_degenerate() const noexcept { return faces_.size() < 4; }

  double diameter() const;
  double tolerance() const;
  double volume() const;
  Vec3 vertex_centroid() const;

  bool contains(const Vec3& x, double tol) const;
  bool contains(const Vec3& x) const { return contains(x, tolerance()); }

  /// Keeps {x : n.x <= d}. n need not be normalized.
  ConvexPolytope clipped(const Vec3& n, double d) const;

  ConvexPolytope transformed(double scale, const Vec3& offset) const;

 private:
  void rebuild_vertices(double tol);

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
};

}  // namespace convfold
