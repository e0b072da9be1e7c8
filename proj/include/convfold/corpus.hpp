#pragma once

// Builtin domains, seeded random convex polygons and geometry file I/O.

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "convfold/geometry.hpp"

namespace convfold {

/// Uniform double in [0, 1) with a fixed mapping, so streams agree across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Convex polygon with exactly n vertices (Valtr's construction), normalized to diameter 1
/// and centered near the origin.
ConvexPolygon random_convex_polygon(std::mt19937_64& rng, int n);

/// Regular n-gon inscribed in the circle of the given radius, first vertex on the x-axis.
ConvexPolygon regular_polygon(int n, double radius = 1.0, const Vec2& center = Vec2::Zero());

/// Names: square, disk, rectangle3, pentagon, parallelogram, triangle, thin-triangle, half-disk.
ConvexPolygon builtin_domain(const std::string& name);
std::vector<std::string> builtin_domain_names();

using Body = std::variant<ConvexPolygon, ConvexPolytope>;

/// Reads {"type":"polygon"|"polytope","vertices":[...]}; vertices are convexified by hull.
Body read_geometry_file(const std::string& path);
Body parse_geometry_json(const std::string& text);
std::string geometry_to_json(const ConvexPolygon& k);
std::string geometry_to_json(const ConvexPolytope& k);

/// A builtin name, random:<vertices>:<seed>, or a path to a geometry file holding a polygon.
ConvexPolygon resolve_domain(const std::string& spec);

}  // namespace convfold
