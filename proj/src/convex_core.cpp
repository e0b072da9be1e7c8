#include "convfold/convex_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace convfold {

SupportResult support_point(const ConvexPolygon& k, const Direction2& omega) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "support of an empty polygon");
  SupportResult best{-std::numeric_limits<double>::infinity(), 0};
  const auto& v = k.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double h = v[i].dot(omega.vector());
    if (h > best.value) best = {h, i};
  }
  return best;
}

SupportResult support_point(const ConvexPolytope& k, const Direction3& omega) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "support of an empty polytope");
  SupportResult best{-std::numeric_limits<double>::infinity(), 0};
  const auto& v = k.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double h = v[i].dot(omega.vector());
    if (h > best.value) best = {h, i};
  }
  return best;
}

namespace {

// Representative of +-d with nonnegative x (positive y on the vertical axis).
Vec2 canonical_sign(const Vec2& d) {
  if (d.x() < -1e-15 || (std::abs(d.x()) <= 1e-15 && d.y() < 0)) return -d;
  return d;
}

struct EdgeCandidate {
  double breadth;
  Vec2 normal;  // canonical sign
  double angle;
};

std::vector<EdgeCandidate> edge_breadths(const ConvexPolygon& k) {
  const auto& v = k.vertices();
  const std::size_t n = v.size();
  std::vector<EdgeCandidate> out;
  out.reserve(n);
  // Antipodal pointer: the vertex minimizing <x, outward normal of edge i>.
  auto outward = [&](std::size_t i) {
    const Vec2 e = v[(i + 1) % n] - v[i];
    return Vec2(e.y(), -e.x()).normalized();
  };
  std::size_t j = 0;
  {
    const Vec2 nrm = outward(0);
    for (std::size_t t = 1; t < n; ++t) {
      if (v[t].dot(nrm) < v[j].dot(nrm)) j = t;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 nrm = outward(i);
    for (std::size_t guard = 0; guard < n; ++guard) {
      if (v[(j + 1) % n].dot(nrm) < v[j].dot(nrm)) j = (j + 1) % n; else break;
    }
    const double b = v[i].dot(nrm) - v[j].dot(nrm);
    const Vec2 c = canonical_sign(nrm);
    out.push_back({b, c, std::atan2(c.y(), c.x())});
  }
  return out;
}

// Candidates within tolerance of the minimum, sorted by the tie-break rule.
std::vector<EdgeCandidate> minimal_candidates(const ConvexPolygon& k) {
  auto all = edge_breadths(k);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : all) best = std::min(best, c.breadth);
  const double tol = k.tolerance();
  std::vector<EdgeCandidate> out;
  for (const auto& c : all) {
    if (c.breadth <= best + tol) out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(), [](const EdgeCandidate& a, const EdgeCandidate& b) {
    const double da = std::abs(a.angle);
    const double db = std::abs(b.angle);
    if (std::abs(da - db) > 1e-12) return da < db;
    return a.angle > b.angle;
  });
  return out;
}

}  // namespace

WidthResult width(const ConvexPolygon& k) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "width of an empty polygon");
  if (k.size() == 1) return {0.0, Direction2(Vec2(1.0, 0.0))};
  if (k.size() == 2) {
    const Vec2 e = k.vertex(1) - k.vertex(0);
    return {0.0, Direction2(canonical_sign(Vec2(e.y(), -e.x())))};
  }
  const auto cands = minimal_candidates(k);
  return {cands.front().breadth, Direction2(cands.front().normal)};
}

double distance_to_segment(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double ee = e.squaredNorm();
  if (ee == 0.0) return (x - a).norm();
  const double t = std::clamp((x - a).dot(e) / ee, 0.0, 1.0);
  return (x - (a + t * e)).norm();
}

double distance_to_segment(const Vec3& x, const Vec3& a, const Vec3& b) {
  const Vec3 e = b - a;
  const double ee = e.squaredNorm();
  if (ee == 0.0) return (x - a).norm();
  const double t = std::clamp((x - a).dot(e) / ee, 0.0, 1.0);
  return (x - (a + t * e)).norm();
}

double distance(const Vec2& x, const ConvexPolygon& k) {
  const auto& v = k.vertices();
  const std::size_t n = v.size();
  if (n == 0) throw Error(ErrorKind::EmptyBody, "distance to an empty polygon");
  if (n == 1) return (x - v[0]).norm();
  if (n == 2) return distance_to_segment(x, v[0], v[1]);
  if (k.contains(x, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, distance_to_segment(x, v[i], v[(i + 1) % n]));
  return best;
}

std::pair<Vec3, Vec3> plane_basis(const Direction3& omega) {
  const Vec3& w = omega.vector();
  std::array<Vec3, 3> residual;
  std::array<double, 3> norms;
  for (int i = 0; i < 3; ++i) {
    residual[i] = Vec3::Unit(i) - w[i] * w;
    norms[i] = residual[i].norm();
  }
  // Drop the axis with the smallest residual (the one most aligned with omega).
  int drop = 0;
  for (int i = 1; i < 3; ++i) {
    if (norms[i] < norms[drop] - 1e-15) drop = i;
  }
  int a = drop == 0 ? 1 : 0;
  int b = drop == 2 ? 1 : 2;
  const Vec3 u = residual[a] / norms[a];
  Vec3 v = residual[b] - residual[b].dot(u) * u;
  v.normalize();
  return {u, v};
}

namespace {

// Distance from x to a planar convex polygon loop with unit normal nrm.
double distance_to_planar(const Vec3& x, const std::vector<Vec3>& loop, const Vec3& nrm) {
  if (loop.empty()) return std::numeric_limits<double>::infinity();
  if (loop.size() == 1) return (x - loop[0]).norm();
  if (loop.size() == 2) return distance_to_segment(x, loop[0], loop[1]);
  const double s = (x - loop[0]).dot(nrm);
  const Vec3 y = x - s * nrm;
  bool inside = true;
  // Orientation independent: check y is on the same side of all edges.
  double sign = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3 e = loop[(i + 1) % loop.size()] - loop[i];
    const double c = e.cross(y - loop[i]).dot(nrm);
    if (std::abs(c) <= 1e-300) continue;
    if (sign == 0.0) sign = c > 0 ? 1.0 : -1.0;
    else if (c * sign < 0) { inside = false; break; }
  }
  if (inside) return std::abs(s);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loop.size(); ++i)
    best = std::min(best, distance_to_segment(x, loop[i], loop[(i + 1) % loop.size()]));
  return best;
}

// Degenerate point cloud viewed as a point, segment or planar polygon.
double distance_to_cloud(const Vec3& x, const std::vector<Vec3>& pts) {
  if (pts.size() == 1) return (x - pts[0]).norm();
  std::size_t ia = 0, ib = 0;
  double far = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = (pts[i] - pts[j]).norm();
      if (d > far) { far = d; ia = i; ib = j; }
    }
  const Vec3 a = pts[ia];
  const Vec3 e = (pts[ib] - a).normalized();
  double off = 0.0;
  std::size_t ic = ia;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 r = pts[i] - a;
    const double d = (r - r.dot(e) * e).norm();
    if (d > off) { off = d; ic = i; }
  }
  if (off <= 1e-9 * far) return distance_to_segment(x, pts[ia], pts[ib]);
  const Vec3 nrm = e.cross(pts[ic] - a).normalized();
  // Planar hull of the cloud.
  const auto [u, v] = plane_basis(Direction3(nrm));
  std::vector<Vec2> flat;
  for (const auto& p : pts) flat.emplace_back((p - a).dot(u), (p - a).dot(v));
  const ConvexPolygon h = ConvexPolygon::hull(flat);
  std::vector<Vec3> loop;
  for (const auto& q : h.vertices()) loop.push_back(a + q.x() * u + q.y() * v);
  return distance_to_planar(x, loop, nrm);
}

}  // namespace

double distance(const Vec3& x, const ConvexPolytope& k) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "distance to an empty polytope");
  if (k.is_degenerate()) return distance_to_cloud(x, k.vertices());
  bool inside = true;
  for (const auto& f : k.faces()) {
    if (f.normal.dot(x) - f.offset > 0.0) { inside = false; break; }
  }
  if (inside) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : k.faces()) best = std::min(best, distance_to_planar(x, f.loop, f.normal));
  return best;
}

double hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyBody, "Hausdorff distance of an empty polygon");
  double d = 0.0;
  for (const auto& v : a.vertices()) d = std::max(d, distance(v, b));
  for (const auto& v : b.vertices()) d = std::max(d, distance(v, a));
  return d;
}

double hausdorff_distance(const ConvexPolytope& a, const ConvexPolytope& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyBody, "Hausdorff distance of an empty polytope");
  double d = 0.0;
  for (const auto& v : a.vertices()) d = std::max(d, distance(v, b));
  for (const auto& v : b.vertices()) d = std::max(d, distance(v, a));
  return d;
}

namespace {

// Keeps {x : <x, n> <= c}; points within tol of the line count as on it.
ConvexPolygon clip_halfplane(const ConvexPolygon& k, const Vec2& n, double c) {
  const auto& v = k.vertices();
  const std::size_t m = v.size();
  if (m == 0) return k;
  const double tol = k.tolerance();
  auto sd = [&](const Vec2& x) {
    const double s = x.dot(n) - c;
    return std::abs(s) <= tol ? 0.0 : s;
  };
  bool any_out = false, any_in = false;
  for (const auto& p : v) {
    const double s = sd(p);
    if (s > 0) any_out = true; else any_in = true;
  }
  if (!any_out) return k;
  if (!any_in) return ConvexPolygon();
  std::vector<Vec2> out;
  const std::size_t edges = m == 2 ? 1 : m;
  for (std::size_t i = 0; i < edges; ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % m];
    const double sp = sd(p), sq = sd(q);
    if (sp <= 0) out.push_back(p);
    if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  if (m == 2 && sd(v[1]) <= 0) out.push_back(v[1]);
  return ConvexPolygon::hull(out);
}

}  // namespace

ConvexPolygon clip_above(const ConvexPolygon& k, const Cut2& cut) {
  return clip_halfplane(k, -cut.omega.vector(), -cut.lambda);
}

ConvexPolygon clip_below(const ConvexPolygon& k, const Cut2& cut) {
  return clip_halfplane(k, cut.omega.vector(), cut.lambda);
}

Segment2 section(const ConvexPolygon& k, const Cut2& cut) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "section of an empty polygon");
  const double tol = k.tolerance();
  const Vec2& w = cut.omega.vector();
  const Vec2 d = perp(w);
  const auto& v = k.vertices();
  const std::size_t m = v.size();
  std::vector<Vec2> hits;
  for (std::size_t i = 0; i < m; ++i) {
    const double s = v[i].dot(w) - cut.lambda;
    if (std::abs(s) <= tol) hits.push_back(v[i] - s * w);
  }
  const std::size_t edges = m == 1 ? 0 : (m == 2 ? 1 : m);
  for (std::size_t i = 0; i < edges; ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % m];
    const double sp = p.dot(w) - cut.lambda, sq = q.dot(w) - cut.lambda;
    if ((sp < -tol && sq > tol) || (sp > tol && sq < -tol)) hits.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  if (hits.empty()) throw Error(ErrorKind::NoIntersection, "cut line misses the body");
  auto lo = hits.front(), hi = hits.front();
  for (const auto& h : hits) {
    if (h.dot(d) < lo.dot(d)) lo = h;
    if (h.dot(d) > hi.dot(d)) hi = h;
  }
  return {lo, hi};
}

PlanarPolygon3 section(const ConvexPolytope& k, const Cut3& cut) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "section of an empty polytope");
  const double tol = k.tolerance();
  const Vec3& w = cut.omega.vector();
  std::vector<Vec3> hits;
  auto consider_edge = [&](const Vec3& p, const Vec3& q) {
    const double sp = p.dot(w) - cut.lambda, sq = q.dot(w) - cut.lambda;
    if ((sp < -tol && sq > tol) || (sp > tol && sq < -tol)) hits.push_back(p + (sp / (sp - sq)) * (q - p));
  };
  for (const auto& p : k.vertices()) {
    const double s = p.dot(w) - cut.lambda;
    if (std::abs(s) <= tol) hits.push_back(p - s * w);
  }
  if (k.is_degenerate()) {
    const auto& v = k.vertices();
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) consider_edge(v[i], v[j]);
  } else {
    for (const auto& f : k.faces())
      for (std::size_t i = 0; i < f.loop.size(); ++i) consider_edge(f.loop[i], f.loop[(i + 1) % f.loop.size()]);
  }
  if (hits.empty()) throw Error(ErrorKind::NoIntersection, "cut plane misses the body");
  const auto [u, v] = plane_basis(cut.omega);
  const Vec3 origin = cut.lambda * w;
  std::vector<Vec2> flat;
  for (const auto& h : hits) flat.emplace_back((h - origin).dot(u), (h - origin).dot(v));
  const ConvexPolygon hull = ConvexPolygon::hull(flat);
  PlanarPolygon3 out;
  out.normal = w;
  for (const auto& q : hull.vertices()) out.loop.push_back(origin + q.x() * u + q.y() * v);
  return out;
}

Segment2 project(const ConvexPolygon& k, const Direction2& omega, double anchor) {
  const Direction2 d = perp(omega);
  const double hi = support(k, d);
  const double lo = -support(k, -d);
  const Vec2 base = anchor * omega.vector();
  return {base + lo * d.vector(), base + hi * d.vector()};
}

ConvexPolygon project(const ConvexPolytope& k, const Direction3& omega) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "projection of an empty polytope");
  const auto [u, v] = plane_basis(omega);
  std::vector<Vec2> flat;
  for (const auto& p : k.vertices()) flat.emplace_back(p.dot(u), p.dot(v));
  return ConvexPolygon::hull(flat);
}

bool section_is_shadow(const ConvexPolygon& k, const Cut2& cut, double* mismatch) {
  const double tol = k.tolerance();
  const Direction2 d = perp(cut.omega);
  Segment2 s{};
  try {
    s = section(k, cut);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoIntersection) throw;
    if (mismatch) *mismatch = std::numeric_limits<double>::infinity();
    return false;
  }
  const double smin = std::min(s.a.dot(d.vector()), s.b.dot(d.vector()));
  const double smax = std::max(s.a.dot(d.vector()), s.b.dot(d.vector()));
  const double gap = std::max(std::abs(smax - support(k, d)), std::abs(smin + support(k, -d)));
  if (mismatch) *mismatch = gap;
  return gap <= 4.0 * tol;
}

ShadowSection shadow_section_for_min_breadth(const ConvexPolygon& k) {
  if (k.is_degenerate()) throw Error(ErrorKind::InvalidBody, "shadow section needs a polygon with interior");
  const double tol = k.tolerance();
  const auto cands = minimal_candidates(k);
  std::optional<ShadowSection> fallback;
  for (const auto& c : cands) {
    const Direction2 w(c.normal);
    const Direction2 wp = perp(w);
    const double top = support(k, w);
    const double bottom = -support(k, -w);
    // Extents of the two supporting faces along the chord-normal axis.
    double a1 = std::numeric_limits<double>::infinity(), b1 = -a1, a2 = a1, b2 = -a1;
    for (const auto& p : k.vertices()) {
      const double s = p.dot(w.vector());
      const double t = p.dot(wp.vector());
      if (s >= top - tol) { a1 = std::min(a1, t); b1 = std::max(b1, t); }
      if (s <= bottom + tol) { a2 = std::min(a2, t); b2 = std::max(b2, t); }
    }
    const double lo = std::max(a1, a2);
    const double hi = std::min(b1, b2);
    const double s0 = 0.5 * (lo + hi);
    Cut2 cut(s0, wp);
    const double hp = support(k, wp);
    const double hm = support(k, -wp);
    if (cut.lambda > 0.5 * (hp - hm)) cut = cut.flipped();
    double mismatch = 0.0;
    const bool ok = lo <= hi + tol && section_is_shadow(k, cut, &mismatch);
    Segment2 chord{};
    try {
      chord = section(k, cut);
    } catch (const Error&) {
      continue;
    }
    ShadowSection result{cut, chord, w, c.breadth, ok, mismatch};
    if (ok) return result;
    if (!fallback || mismatch < fallback->mismatch) fallback = result;
  }
  return *fallback;
}

}  // namespace convfold
