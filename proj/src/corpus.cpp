#include "convfold/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace convfold {

namespace {

// Fisher-Yates with the portable uniform mapping; std::shuffle is not reproducible across
// standard libraries.
template <class T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

// Splits sorted coordinates into two chains running from min to max, returns the
// successive differences of a closed walk.
std::vector<double> valtr_increments(std::mt19937_64& rng, int n) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = uniform01(rng);
  std::sort(xs.begin(), xs.end());
  const double lo = xs.front(), hi = xs.back();
  std::vector<double> out;
  double last1 = lo, last2 = lo;
  for (int i = 1; i + 1 < n; ++i) {
    if (uniform01(rng) < 0.5) {
      out.push_back(xs[i] - last1);
      last1 = xs[i];
    } else {
      out.push_back(last2 - xs[i]);
      last2 = xs[i];
    }
  }
  out.push_back(hi - last1);
  out.push_back(last2 - hi);
  return out;
}

}  // namespace

ConvexPolygon random_convex_polygon(std::mt19937_64& rng, int n) {
  if (n < 3) throw Error(ErrorKind::InvalidBody, "random polygon needs at least 3 vertices");
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto dx = valtr_increments(rng, n);
    auto dy = valtr_increments(rng, n);
    portable_shuffle(dy, rng);
    std::vector<Vec2> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(dx[i], dy[i]);
    std::sort(edges.begin(), edges.end(), [](const Vec2& a, const Vec2& b) {
      return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x());
    });
    std::vector<Vec2> pts;
    Vec2 cur = Vec2::Zero();
    for (const auto& e : edges) {
      pts.push_back(cur);
      cur += e;
    }
    ConvexPolygon k = ConvexPolygon::hull(pts);
    if (static_cast<int>(k.size()) != n) continue;
    const double d = k.diameter();
    const Vec2 c = k.centroid();
    std::vector<Vec2> v = k.vertices();
    for (auto& p : v) p = (p - c) / d;
    ConvexPolygon out = ConvexPolygon::hull(v);
    if (static_cast<int>(out.size()) == n) return out;
  }
  throw Error(ErrorKind::InvalidBody, "could not draw a polygon with the requested vertex count");
}

ConvexPolygon regular_polygon(int n, double radius, const Vec2& center) {
  if (n < 3 || !(radius > 0.0)) throw Error(ErrorKind::InvalidBody, "regular polygon needs n >= 3 and radius > 0");
  std::vector<Vec2> v;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    v.push_back(center + radius * Vec2(std::cos(th), std::sin(th)));
  }
  return ConvexPolygon(std::move(v));
}

std::vector<std::string> builtin_domain_names() {
  return {"square", "disk", "rectangle3", "pentagon", "parallelogram", "triangle", "thin-triangle", "half-disk"};
}

ConvexPolygon builtin_domain(const std::string& name) {
  if (name == "square") return ConvexPolygon({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)});
  if (name == "disk") return regular_polygon(64);
  if (name == "rectangle3") return ConvexPolygon({Vec2(0, 0), Vec2(3, 0), Vec2(3, 1), Vec2(0, 1)});
  if (name == "pentagon") {
    // Irregular pentagon with one long flat side.
    return ConvexPolygon({Vec2(0, 0), Vec2(1.2, 0), Vec2(1.35, 0.55), Vec2(0.7, 1.05), Vec2(-0.1, 0.6)});
  }
  if (name == "parallelogram") return ConvexPolygon({Vec2(-1, 0), Vec2(0, 0), Vec2(1, 1), Vec2(0, 1)});
  if (name == "triangle") return ConvexPolygon({Vec2(0, 0), Vec2(1, 0), Vec2(0.5, std::sqrt(3.0) / 2)});
  if (name == "half-disk") {
    std::vector<Vec2> v;
    for (int i = 0; i <= 32; ++i) {
      const double th = std::numbers::pi * i / 32;
      v.emplace_back(std::cos(th), std::sin(th));
    }
    return ConvexPolygon(std::move(v));
  }
  if (name == "thin-triangle") return ConvexPolygon({Vec2(0, 0), Vec2(1, -0.3), Vec2(1, 0.3)});
  throw Error(ErrorKind::InvalidConfig, "unknown builtin domain '" + name + "'");
}

Body parse_geometry_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("geometry file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j.contains("vertices") || !j["vertices"].is_array()) {
    throw Error(ErrorKind::InvalidConfig, "geometry needs \"type\" and \"vertices\"");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "polygon") {
    std::vector<Vec2> v;
    for (const auto& p : j["vertices"]) {
      if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::InvalidConfig, "polygon vertex must be [x, y]");
      v.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return ConvexPolygon::hull(v);
  }
  if (type == "polytope") {
    std::vector<Vec3> v;
    for (const auto& p : j["vertices"]) {
      if (!p.is_array() || p.size() != 3) throw Error(ErrorKind::InvalidConfig, "polytope vertex must be [x, y, z]");
      v.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    return ConvexPolytope::hull(v);
  }
  throw Error(ErrorKind::InvalidConfig, "unknown geometry type '" + type + "'");
}

Body read_geometry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open geometry file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_geometry_json(ss.str());
}

std::string geometry_to_json(const ConvexPolygon& k) {
  nlohmann::json j;
  j["type"] = "polygon";
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : k.vertices()) j["vertices"].push_back({v.x(), v.y()});
  return j.dump();
}

std::string geometry_to_json(const ConvexPolytope& k) {
  nlohmann::json j;
  j["type"] = "polytope";
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : k.vertices()) j["vertices"].push_back({v.x(), v.y(), v.z()});
  return j.dump();
}

ConvexPolygon resolve_domain(const std::string& spec) {
  const auto names = builtin_domain_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return builtin_domain(spec);
  if (spec.rfind("random:", 0) == 0) {
    int n = 0;
    unsigned long long seed = 0;
    char tail = 0;
    if (std::sscanf(spec.c_str() + 7, "%d:%llu%c", &n, &seed, &tail) != 2 || n < 3) {
      throw Error(ErrorKind::InvalidConfig, "random domains are written random:<vertices>:<seed>");
    }
    std::mt19937_64 rng(seed);
    return random_convex_polygon(rng, n);
  }
  Body b = read_geometry_file(spec);
  if (auto* k = std::get_if<ConvexPolygon>(&b)) {
    if (k->is_degenerate()) throw Error(ErrorKind::InvalidBody, "domain must have interior");
    return *k;
  }
  throw Error(ErrorKind::InvalidConfig, "domain file must hold a polygon");
}

}  // namespace convfold
