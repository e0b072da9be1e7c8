#pragma once

// Figures, field dumps and experiment configuration files.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "convfold/mesh.hpp"

namespace convfold {

/// SVG canvas over a rectangle of the plane, y pointing up.
class Svg {
 public:
  Svg(Vec2 lo, Vec2 hi, double width_px = 600.0);

  void polygon(const ConvexPolygon& k, const std::string& stroke, const std::string& fill = "none",
               double fill_opacity = 0.3);
  void polyline(const std::vector<Vec2>& pts, const std::string& stroke, bool closed = false);
  /// The line <x, omega> = lambda, clipped to the canvas.
  void line(const Vec2& omega, double lambda, const std::string& stroke, bool dashed = true);
  void point(const Vec2& x, const std::string& fill, double radius_px = 3.0);
  void text(const Vec2& x, const std::string& s);

  std::string str() const;
  void save(const std::string& path) const;

 private:
  Vec2 map(const Vec2& x) const;

  Vec2 lo_, hi_;
  double scale_, width_, height_;
  std::vector<std::string> items_;
};

/// Bounding box of a polygon grown by a relative margin.
std::pair<Vec2, Vec2> padded_box(const ConvexPolygon& k, double margin = 0.08);

/// One line per node: x,y,u with a header.
void write_field_csv(const ScalarField& u, const std::string& path);

/// Field resampled on an nx by ny grid of the mesh bounding box, NaN outside the domain.
struct GridDump {
  std::uint32_t nx = 0, ny = 0;
  double x0 = 0, y0 = 0, dx = 0, dy = 0;
  std::vector<double> values;  // row-major, y outer
};

GridDump resample(const ScalarField& u, std::uint32_t nx, std::uint32_t ny);

/// Little-endian layout: "PLAPGRID", u32 version 1, u32 nx, u32 ny, f64 x0 y0 dx dy, f64 values.
void write_grid_binary(const GridDump& g, const std::string& path);
GridDump read_grid_binary(const std::string& path);

/// Flat key = value file. Values are numbers, quoted or bare strings, booleans, or
/// [a, b, ...] lists of those; '#' starts a comment. Throws InvalidConfig on malformed lines.
using ConfigEntries = std::map<std::string, std::vector<std::string>>;
ConfigEntries parse_config(const std::string& text);
ConfigEntries read_config_file(const std::string& path);

}  // namespace convfold
