#include "convfold/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "convfold/convex_core.hpp"

namespace convfold {

namespace {

constexpr double kRelTol = 1e-9;

double point_cloud_diameter(const std::vector<Vec2>& v) {
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, (v[i] - v[j]).squaredNorm());
  return std::sqrt(best);
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Vec2> ccw_vertices) : vertices_(std::move(ccw_vertices)) {
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw Error(ErrorKind::InvalidBody, "non-finite vertex");
  }
  const std::size_t n = vertices_.size();
  if (n < 2) return;
  const double tol = tolerance();
  for (std::size_t i = 0; i < n; ++i) {
    if ((vertices_[i] - vertices_[(i + 1) % n]).norm() <= tol && !(n == 2 && i == 1)) {
      throw Error(ErrorKind::InvalidBody, "duplicate vertices");
    }
  }
  if (n == 2) return;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertices_[(i + 1) % n] - vertices_[i];
    const Vec2 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    if (cross(e0, e1) < -kRelTol * e0.norm() * e1.norm()) {
      throw Error(ErrorKind::InvalidBody, "vertex loop is not convex and counterclockwise");
    }
  }
  if (area() <= 0.0) throw Error(ErrorKind::InvalidBody, "polygon has no interior");
}

ConvexPolygon ConvexPolygon::hull(const std::vector<Vec2>& points) {
  std::vector<Vec2> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorKind::InvalidBody, "non-finite point");
    pts.push_back(p);
  }
  if (pts.empty()) return ConvexPolygon();
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  double extent = 0.0;
  for (const auto& p : pts) extent = std::max(extent, (p - pts.front()).norm());
  const double dup_tol = 1e-12 * extent;
  std::vector<Vec2> uniq;
  for (const auto& p : pts) {
    bool dup = false;
    for (auto it = uniq.rbegin(); it != uniq.rend(); ++it) {
      if (p.x() - it->x() > dup_tol) break;
      if ((p - *it).norm() <= dup_tol) { dup = true; break; }
    }
    if (!dup) uniq.push_back(p);
  }
  if (uniq.size() == 1) return point(uniq.front());

  const double area_tol = 1e-13 * extent * extent;
  auto turn = [](const Vec2& o, const Vec2& a, const Vec2& b) { return cross(a - o, b - o); };
  std::vector<Vec2> h(2 * uniq.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], uniq[i]) <= area_tol) --k;
    h[k++] = uniq[i];
  }
  for (std::size_t i = uniq.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && turn(h[k - 2], h[k - 1], uniq[i]) <= area_tol) --k;
    h[k++] = uniq[i];
  }
  h.resize(k - 1);
  if (h.size() <= 2) return segment(uniq.front(), uniq.back());
  return ConvexPolygon(std::move(h), Unchecked{});
}

ConvexPolygon ConvexPolygon::segment(const Vec2& a, const Vec2& b) {
  if ((a - b).norm() == 0.0) return point(a);
  return ConvexPolygon({a, b}, Unchecked{});
}

ConvexPolygon ConvexPolygon::point(const Vec2& p) { return ConvexPolygon({p}, Unchecked{}); }

double ConvexPolygon::area() const {
  const std::size_t n = vertices_.size();
  if (n < 3) return 0.0;
  double a = 0.0;
  const Vec2& o = vertices_[0];
  for (std::size_t i = 1; i + 1 < n; ++i) a += cross(vertices_[i] - o, vertices_[i + 1] - o);
  return 0.5 * a;
}

double ConvexPolygon::diameter() const {
  const std::size_t n = vertices_.size();
  if (n < 2) return 0.0;
  if (n <= 16) return point_cloud_diameter(vertices_);
  // Rotating calipers over antipodal vertex-edge pairs.
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    const Vec2 e = b - a;
    for (std::size_t guard = 0; guard < n; ++guard) {
      const double cur = cross(e, vertices_[j % n] - a);
      const double nxt = cross(e, vertices_[(j + 1) % n] - a);
      if (nxt > cur) ++j; else break;
    }
    best = std::max({best, (vertices_[j % n] - a).squaredNorm(), (vertices_[j % n] - b).squaredNorm()});
  }
  return std::sqrt(best);
}

Vec2 ConvexPolygon::centroid() const {
  const std::size_t n = vertices_.size();
  if (n == 0) throw Error(ErrorKind::EmptyBody, "centroid of empty polygon");
  if (n < 3) {
    Vec2 c = Vec2::Zero();
    for (const auto& v : vertices_) c += v;
    return c / static_cast<double>(n);
  }
  const Vec2& o = vertices_[0];
  Vec2 c = Vec2::Zero();
  double a = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double t = cross(vertices_[i] - o, vertices_[i + 1] - o);
    c += t * (o + vertices_[i] + vertices_[i + 1]) / 3.0;
    a += t;
  }
  return c / a;
}

double ConvexPolygon::tolerance() const { return kRelTol * std::max(diameter(), 1e-300); }

bool ConvexPolygon::contains(const Vec2& x, double tol) const {
  const std::size_t n = vertices_.size();
  if (n == 0) return false;
  if (n == 1) return (x - vertices_[0]).norm() <= tol;
  if (n == 2) return distance_to_segment(x, vertices_[0], vertices_[1]) <= tol;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2 e = vertices_[(i + 1) % n] - a;
    if (cross(e, x - a) / e.norm() < -tol) return false;
  }
  return true;
}

ConvexPolygon ConvexPolygon::translated(const Vec2& t) const {
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p += t;
  return ConvexPolygon(std::move(v), Unchecked{});
}

ConvexPolygon ConvexPolygon::scaled(double s) const {
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidBody, "scale must be positive");
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p *= s;
  return ConvexPolygon(std::move(v), Unchecked{});
}

// ---------------------------------------------------------------------------
// ConvexPolytope

namespace {

void dedupe(std::vector<Vec3>& pts, double tol) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out) {
      if ((p - q).norm() <= tol) { dup = true; break; }
    }
    if (!dup) out.push_back(p);
  }
  pts = std::move(out);
}

void dedupe_loop(std::vector<Vec3>& loop, double tol) {
  std::vector<Vec3> out;
  for (const auto& p : loop) {
    if (!out.empty() && (p - out.back()).norm() <= tol) continue;
    out.push_back(p);
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() <= tol) out.pop_back();
  loop = std::move(out);
}

// Orders coplanar points counterclockwise around `normal`.
std::vector<Vec3> order_in_plane(std::vector<Vec3> pts, const Vec3& normal) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  const auto [u, v] = plane_basis(Direction3(normal));
  // plane_basis returns an arbitrary-handed pair; fix handedness against the normal.
  const double hand = u.cross(v).dot(normal) >= 0 ? 1.0 : -1.0;
  std::vector<std::pair<double, Vec3>> keyed;
  keyed.reserve(pts.size());
  for (const auto& p : pts) {
    const Vec3 d = p - c;
    keyed.emplace_back(std::atan2(hand * d.dot(v), d.dot(u)), p);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec3> out;
  out.reserve(keyed.size());
  for (auto& kp : keyed) out.push_back(kp.second);
  return out;
}

double loop_area(const std::vector<Vec3>& loop) {
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < loop.size(); ++i) s += loop[i].cross(loop[(i + 1) % loop.size()]);
  return 0.5 * s.norm();
}

}  // namespace

ConvexPolytope ConvexPolytope::box(const Vec3& lo, const Vec3& hi) {
  ConvexPolytope p;
  auto corner = [&](int i, int j, int k) { return Vec3(i ? hi.x() : lo.x(), j ? hi.y() : lo.y(), k ? hi.z() : lo.z()); };
  p.faces_ = {
      {Vec3(-1, 0, 0), -lo.x(), {corner(0, 0, 0), corner(0, 0, 1), corner(0, 1, 1), corner(0, 1, 0)}},
      {Vec3(1, 0, 0), hi.x(), {corner(1, 0, 0), corner(1, 1, 0), corner(1, 1, 1), corner(1, 0, 1)}},
      {Vec3(0, -1, 0), -lo.y(), {corner(0, 0, 0), corner(1, 0, 0), corner(1, 0, 1), corner(0, 0, 1)}},
      {Vec3(0, 1, 0), hi.y(), {corner(0, 1, 0), corner(0, 1, 1), corner(1, 1, 1), corner(1, 1, 0)}},
      {Vec3(0, 0, -1), -lo.z(), {corner(0, 0, 0), corner(0, 1, 0), corner(1, 1, 0), corner(1, 0, 0)}},
      {Vec3(0, 0, 1), hi.z(), {corner(0, 0, 1), corner(1, 0, 1), corner(1, 1, 1), corner(0, 1, 1)}},
  };
  p.rebuild_vertices(kRelTol * (hi - lo).norm());
  return p;
}

ConvexPolytope ConvexPolytope::from_halfspaces(const std::vector<std::pair<Vec3, double>>& halfspaces,
                                               const Vec3& box_lo, const Vec3& box_hi) {
  ConvexPolytope p = box(box_lo, box_hi);
  for (const auto& [n, d] : halfspaces) p = p.clipped(n, d);
  return p;
}

ConvexPolytope ConvexPolytope::degenerate(std::vector<Vec3> points) {
  ConvexPolytope p;
  double extent = 0.0;
  for (const auto& a : points)
    for (const auto& b : points) extent = std::max(extent, (a - b).norm());
  dedupe(points, 1e-12 * extent);
  p.vertices_ = std::move(points);
  return p;
}

ConvexPolytope ConvexPolytope::hull(const std::vector<Vec3>& points) {
  ConvexPolytope cloud = degenerate(points);
  const auto& v = cloud.vertices_;
  if (v.size() < 4) return cloud;
  const double tol = cloud.tolerance();
  Vec3 lo = v.front(), hi = v.front();
  for (const auto& p : v) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Supporting planes through vertex triples (small clouds only).
  std::vector<std::pair<Vec3, double>> planes;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      for (std::size_t k = j + 1; k < v.size(); ++k) {
        Vec3 n = (v[j] - v[i]).cross(v[k] - v[i]);
        if (n.norm() <= tol * tol) continue;
        n.normalize();
        double smin = 0.0, smax = 0.0;
        for (const auto& p : v) {
          const double s = n.dot(p - v[i]);
          smin = std::min(smin, s);
          smax = std::max(smax, s);
        }
        if (smax <= tol && smin >= -tol) return cloud;
        if (smax <= tol) planes.emplace_back(n, n.dot(v[i]));
        else if (smin >= -tol) planes.emplace_back(-n, -n.dot(v[i]));
      }
  if (planes.empty()) return cloud;
  const Vec3 pad = Vec3::Constant(0.25 * cloud.diameter());
  return from_halfspaces(planes, lo - pad, hi + pad);
}

void ConvexPolytope::rebuild_vertices(double tol) {
  std::vector<Vec3> pts;
  for (const auto& f : faces_) pts.insert(pts.end(), f.loop.begin(), f.loop.end());
  dedupe(pts, tol);
  vertices_ = std::move(pts);
}

double ConvexPolytope::diameter() const {
  double best = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    for (std::size_t j = i + 1; j < vertices_.size(); ++j)
      best = std::max(best, (vertices_[i] - vertices_[j]).squaredNorm());
  return std::sqrt(best);
}

double ConvexPolytope::tolerance() const { return kRelTol * std::max(diameter(), 1e-300); }

double ConvexPolytope::volume() const {
  if (is_degenerate()) return 0.0;
  const Vec3 c = vertex_centroid();
  double v = 0.0;
  for (const auto& f : faces_) v += (f.offset - f.normal.dot(c)) * loop_area(f.loop) / 3.0;
  return v;
}

Vec3 ConvexPolytope::vertex_centroid() const {
  if (vertices_.empty()) throw Error(ErrorKind::EmptyBody, "centroid of empty polytope");
  Vec3 c = Vec3::Zero();
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

bool ConvexPolytope::contains(const Vec3& x, double tol) const {
  if (vertices_.empty()) return false;
  if (is_degenerate()) return distance(x, *this) <= tol;
  for (const auto& f : faces_) {
    if (f.normal.dot(x) - f.offset > tol) return false;
  }
  return true;
}

ConvexPolytope ConvexPolytope::clipped(const Vec3& n_in, double d_in) const {
  const double nn = n_in.norm();
  if (!(nn > 0.0)) throw Error(ErrorKind::InvalidBody, "clip normal must be nonzero");
  const Vec3 n = n_in / nn;
  const double d = d_in / nn;
  if (vertices_.empty()) return *this;
  const double tol = tolerance();

  bool any_out = false;
  bool any_in = false;
  for (const auto& v : vertices_) {
    const double s = n.dot(v) - d;
    if (s > tol) any_out = true;
    if (s <= tol) any_in = true;
  }
  if (!any_out) return *this;
  if (!any_in) return ConvexPolytope();

  auto sd = [&](const Vec3& x) {
    const double s = n.dot(x) - d;
    return std::abs(s) <= tol ? 0.0 : s;
  };

  if (is_degenerate()) {
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const double si = sd(vertices_[i]);
      if (si <= 0) pts.push_back(vertices_[i]);
      for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
        const double sj = sd(vertices_[j]);
        if ((si < 0 && sj > 0) || (si > 0 && sj < 0)) {
          pts.push_back(vertices_[i] + (si / (si - sj)) * (vertices_[j] - vertices_[i]));
        }
      }
    }
    return degenerate(std::move(pts));
  }

  ConvexPolytope out;
  std::vector<Vec3> cap_points;
  for (const auto& f : faces_) {
    std::vector<Vec3> loop;
    const std::size_t m = f.loop.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3& p = f.loop[i];
      const Vec3& q = f.loop[(i + 1) % m];
      const double sp = sd(p);
      const double sq = sd(q);
      if (sp <= 0) {
        loop.push_back(p);
        if (sp == 0) cap_points.push_back(p);
      }
      if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) {
        const Vec3 x = p + (sp / (sp - sq)) * (q - p);
        loop.push_back(x);
        cap_points.push_back(x);
      }
    }
    dedupe_loop(loop, tol);
    if (loop.size() >= 3 && loop_area(loop) > tol * tol) {
      out.faces_.push_back({f.normal, f.offset, std::move(loop)});
    }
  }
  dedupe(cap_points, tol);
  if (cap_points.size() >= 3) {
    auto ordered = order_in_plane(cap_points, n);
    if (loop_area(ordered) > tol * tol) out.faces_.push_back({n, d, std::move(ordered)});
  }
  if (out.faces_.size() < 4) {
    std::vector<Vec3> pts = cap_points;
    for (const auto& f : out.faces_) pts.insert(pts.end(), f.loop.begin(), f.loop.end());
    for (const auto& v : vertices_) {
      if (sd(v) <= 0) pts.push_back(v);
    }
    return degenerate(std::move(pts));
  }
  out.rebuild_vertices(tol);
  return out;
}

ConvexPolytope ConvexPolytope::transformed(double scale, const Vec3& offset) const {
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidBody, "scale must be positive");
  ConvexPolytope p = *this;
  for (auto& v : p.vertices_) v = scale * v + offset;
  for (auto& f : p.faces_) {
    for (auto& v : f.loop) v = scale * v + offset;
    f.offset = scale * f.offset + f.normal.dot(offset);
  }
  return p;
}

}  // namespace convfold
