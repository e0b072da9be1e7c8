#pragma once

// Triangle meshes of convex polygons and piecewise-linear fields on them.

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "convfold/geometry.hpp"

namespace convfold {

/// Delaunay triangulation of a point cloud (Bowyer-Watson). Triangles are counterclockwise.
std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& points);

struct PointLocation {
  int triangle;
  std::array<double, 3> barycentric;
};

class Mesh {
 public:
  Mesh(ConvexPolygon domain, std::vector<Vec2> points, std::vector<std::array<int, 3>> triangles,
       std::vector<bool> boundary, double h);

  const ConvexPolygon& domain() const noexcept { return domain_; }
  const std::vector<Vec2>& points() const noexcept { return points_; }
  const std::vector<std::array<int, 3>>& triangles() const noexcept { return triangles_; }
  const std::vector<bool>& boundary() const noexcept { return boundary_; }
  double h() const noexcept { return h_; }
  std::size_t n_points() const noexcept { return points_.size(); }
  std::size_t n_triangles() const noexcept { return triangles_.size(); }

  double area(int t) const { return areas_[t]; }
  /// Gradients of the three hat functions on triangle t, one per column.
  const Eigen::Matrix<double, 2, 3>& hat_gradients(int t) const { return grads_[t]; }
  /// Lumped mass: a third of the area of every triangle touching node i.
  const std::vector<double>& lumped_mass() const noexcept { return mass_; }
  /// Neighbouring nodes sharing an edge with node i.
  const std::vector<std::vector<int>>& node_neighbours() const noexcept { return adjacency_; }

  double min_angle_degrees() const;
  double total_area() const;

  std::optional<PointLocation> locate(const Vec2& x) const;

 private:
  ConvexPolygon domain_;
  std::vector<Vec2> points_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<bool> boundary_;
  double h_;
  std::vector<double> areas_;
  std::vector<Eigen::Matrix<double, 2, 3>> grads_;
  std::vector<double> mass_;
  std::vector<std::vector<int>> adjacency_;

  // Uniform bucket grid over the bounding box for point location.
  Vec2 lo_, cell_;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

/// Boundary nodes at spacing <= h, interior nodes from a smoothed triangular lattice.
/// Throws InvalidBody for degenerate domains and InvalidConfig unless 0 < h < diam / 4.
std::shared_ptr<const Mesh> mesh_polygon(const ConvexPolygon& domain, double h);

/// Nodal values over a mesh, interpolated linearly on each triangle.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }

  /// Interpolated value; nullopt outside the mesh.
  std::optional<double> value(const Vec2& x) const;
  Vec2 gradient(int triangle) const;
  double max() const { return values_.maxCoeff(); }
  int argmax_node() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Eigen::VectorXd values_;
};

}  // namespace convfold
