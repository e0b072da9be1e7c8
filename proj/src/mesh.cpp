#include "convfold/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "convfold/convex_core.hpp"

namespace convfold {

namespace {

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> n;  // n[i] is across the edge opposite v[i]
  bool alive;
};

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

// Positive when d lies inside the circumcircle of the counterclockwise triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

class Triangulator {
 public:
  // Evaluated with the endpoints in index order so that both sides of an edge agree.
  double side(int a, int b, const Vec2& x) const {
    return a < b ? orient(p_[a], p_[b], x) : -orient(p_[b], p_[a], x);
  }

  explicit Triangulator(const std::vector<Vec2>& pts) : p_(pts) {
    Vec2 lo = pts.front(), hi = pts.front();
    for (const auto& q : pts) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
    const Vec2 c = 0.5 * (lo + hi);
    const double m = 50.0 * std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-300});
    scale_ = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    n_real_ = static_cast<int>(pts.size());
    p_.push_back(c + Vec2(-2 * m, -m));
    p_.push_back(c + Vec2(2 * m, -m));
    p_.push_back(c + Vec2(0, 2 * m));
    tris_.push_back({{n_real_, n_real_ + 1, n_real_ + 2}, {-1, -1, -1}, true});
  }

  void insert(int pi) {
    const Vec2& x = p_[pi];
    const int t0 = locate(x);
    ++stamp_;
    if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
    cavity_.clear();
    edges_.clear();
    std::vector<int> stack{t0};
    mark_[t0] = stamp_;
    for (;;) {
      while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        cavity_.push_back(t);
        for (int i = 0; i < 3; ++i) {
          const int nb = tris_[t].n[i];
          if (nb < 0 || mark_[nb] == stamp_) continue;
          const auto& nv = tris_[nb].v;
          if (incircle(p_[nv[0]], p_[nv[1]], p_[nv[2]], x) > 0.0) {
            mark_[nb] = stamp_;
            stack.push_back(nb);
          }
        }
      }
      // Near-cocircular inputs can give inconsistent incircle signs; grow the cavity until
      // every boundary edge is strictly visible from the new point.
      edges_.clear();
      for (int t : cavity_) {
        for (int i = 0; i < 3; ++i) {
          const int nb = tris_[t].n[i];
          if (nb >= 0 && mark_[nb] == stamp_) continue;
          const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
          if (nb >= 0 && side(a, b, x) <= 0.0) {
            mark_[nb] = stamp_;
            stack.push_back(nb);
          }
          edges_.push_back({a, b, nb});
        }
      }
      if (stack.empty()) break;
    }
    for (int t : cavity_) {
      tris_[t].alive = false;
      free_.push_back(t);
    }
    created_.clear();
    for (const auto& e : edges_) {
      int id;
      if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
      } else {
        id = static_cast<int>(tris_.size());
        tris_.push_back({});
        mark_.push_back(0);
      }
      tris_[id] = {{e.a, e.b, pi}, {-1, -1, e.outer}, true};
      if (e.outer >= 0) {
        auto& o = tris_[e.outer];
        for (int j = 0; j < 3; ++j) {
          if (o.v[(j + 1) % 3] == e.b && o.v[(j + 2) % 3] == e.a) o.n[j] = id;
        }
      }
      created_.push_back(id);
    }
    // Edge (b, p) of (a, b, p) is shared with the new triangle starting at b.
    for (int id : created_) {
      for (int other : created_) {
        if (tris_[other].v[0] == tris_[id].v[1]) tris_[id].n[0] = other;
        if (tris_[other].v[1] == tris_[id].v[0]) tris_[id].n[1] = other;
      }
    }
    last_ = created_.front();
  }

  std::vector<std::array<int, 3>> result() const {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n_real_ || t.v[1] >= n_real_ || t.v[2] >= n_real_) continue;
      if (orient(p_[t.v[0]], p_[t.v[1]], p_[t.v[2]]) <= 1e-14 * scale_ * scale_) continue;
      out.push_back(t.v);
    }
    return out;
  }

 private:
  struct Edge {
    int a, b, outer;
  };

  int locate(const Vec2& x) const {
    int t = last_;
    if (!tris_[t].alive) {
      for (t = 0; !tris_[t].alive; ++t) {}
    }
    for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
      // Rotating the starting edge makes the walk terminate in non-Delaunay meshes too.
      bool moved = false;
      const int start = static_cast<int>(steps % 3);
      for (int k = 0; k < 3; ++k) {
        const int i = (start + k) % 3;
        const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
        if (side(a, b, x) < 0.0 && tris_[t].n[i] >= 0) {
          t = tris_[t].n[i];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    throw Error(ErrorKind::InvalidBody, "point location failed during triangulation");
  }

  std::vector<Vec2> p_;
  std::vector<Tri> tris_;
  std::vector<int> mark_, free_, cavity_, created_;
  std::vector<Edge> edges_;
  int stamp_ = 0, last_ = 0, n_real_ = 0;
  double scale_ = 1.0;
};


// Closes dents left along the convex hull by the removal of super-triangle fans, then
// restores the empty-circumcircle property by edge flips.
void close_hull(const std::vector<Vec2>& p, std::vector<std::array<int, 3>>& tris, double scale) {
  const double tol = 1e-14 * scale * scale;
  for (bool changed = true; changed;) {
    changed = false;
    std::set<std::pair<int, int>> edges;
    for (const auto& t : tris) {
      for (int i = 0; i < 3; ++i) edges.emplace(t[i], t[(i + 1) % 3]);
    }
    std::map<int, int> next, prev;
    for (const auto& [a, b] : edges) {
      if (!edges.count({b, a})) {
        next[a] = b;
        prev[b] = a;
      }
    }
    for (const auto& [b, c] : next) {
      const int a = prev[b];
      if (!(orient(p[a], p[b], p[c]) < -tol)) continue;
      bool empty = true;
      for (const auto& [v, w] : next) {
        if (v == a || v == b || v == c) continue;
        if (orient(p[a], p[c], p[v]) > 0 && orient(p[c], p[b], p[v]) > 0 && orient(p[b], p[a], p[v]) > 0) {
          empty = false;
          break;
        }
      }
      if (!empty) continue;
      tris.push_back({a, c, b});
      changed = true;
      break;
    }
  }
  for (bool flipped = true; flipped;) {
    flipped = false;
    std::map<std::pair<int, int>, std::pair<int, int>> owner;  // directed edge -> (triangle, slot)
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      for (int i = 0; i < 3; ++i) owner[{tris[t][i], tris[t][(i + 1) % 3]}] = {t, i};
    }
    std::vector<bool> touched(tris.size(), false);
    for (const auto& [e, ti] : owner) {
      const auto it = owner.find({e.second, e.first});
      if (it == owner.end()) continue;
      const int t1 = ti.first, t2 = it->second.first;
      if (touched[t1] || touched[t2]) continue;
      const int a = e.first, b = e.second;
      const int c = tris[t1][(ti.second + 2) % 3];
      const int d = tris[t2][(it->second.second + 2) % 3];
      if (!(incircle(p[a], p[b], p[c], p[d]) > tol * scale * scale)) continue;
      if (!(orient(p[c], p[a], p[d]) > 0) || !(orient(p[d], p[b], p[c]) > 0)) continue;
      tris[t1] = {c, a, d};
      tris[t2] = {d, b, c};
      touched[t1] = touched[t2] = true;
      flipped = true;
    }
  }
}

}  // namespace

std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& points) {
  if (points.size() < 3) return {};
  // Insert along a serpentine sweep of grid cells so that walks stay short.
  Vec2 lo = points.front(), hi = points.front();
  for (const auto& q : points) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(points.size())) / 2));
  const Vec2 ext = (hi - lo).cwiseMax(Vec2::Constant(1e-300));
  std::vector<int> order(points.size());
  std::vector<std::pair<long, double>> key(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    order[i] = static_cast<int>(i);
    const int row = std::min(cells - 1, static_cast<int>((points[i].y() - lo.y()) / ext.y() * cells));
    const double x = points[i].x();
    key[i] = {row, row % 2 == 0 ? x : -x};
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  Triangulator tr(points);
  for (int i : order) tr.insert(i);
  auto tris = tr.result();
  close_hull(points, tris, std::max(ext.x(), ext.y()));
  return tris;
}

Mesh::Mesh(ConvexPolygon domain, std::vector<Vec2> points, std::vector<std::array<int, 3>> triangles,
           std::vector<bool> boundary, double h)
    : domain_(std::move(domain)),
      points_(std::move(points)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary)),
      h_(h) {
  const std::size_t nt = triangles_.size();
  areas_.resize(nt);
  grads_.resize(nt);
  mass_.assign(points_.size(), 0.0);
  adjacency_.assign(points_.size(), {});
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    const Vec2 &p0 = points_[tri[0]], &p1 = points_[tri[1]], &p2 = points_[tri[2]];
    const double a2 = cross(p1 - p0, p2 - p0);
    areas_[t] = 0.5 * a2;
    grads_[t].col(0) = perp(Vec2(p2 - p1)) / a2;
    grads_[t].col(1) = perp(Vec2(p0 - p2)) / a2;
    grads_[t].col(2) = perp(Vec2(p1 - p0)) / a2;
    for (int i = 0; i < 3; ++i) {
      mass_[tri[i]] += areas_[t] / 3.0;
      for (int j = 0; j < 3; ++j) {
        if (i != j) adjacency_[tri[i]].push_back(tri[j]);
      }
    }
  }
  for (auto& a : adjacency_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  lo_ = points_.front();
  Vec2 hi = lo_;
  for (const auto& p : points_) {
    lo_ = lo_.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double side = std::max(h_, 1e-12);
  nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo_.x()) / side)));
  ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo_.y()) / side)));
  cell_ = Vec2(std::max((hi.x() - lo_.x()) / nx_, 1e-300), std::max((hi.y() - lo_.y()) / ny_, 1e-300));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t t = 0; t < nt; ++t) {
    Vec2 a = points_[triangles_[t][0]], b = a;
    for (int i = 1; i < 3; ++i) {
      a = a.cwiseMin(points_[triangles_[t][i]]);
      b = b.cwiseMax(points_[triangles_[t][i]]);
    }
    const int i0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / cell_.x()), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / cell_.x()), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / cell_.y()), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / cell_.y()), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
    }
  }
}

double Mesh::min_angle_degrees() const {
  double best = 180.0;
  for (const auto& tri : triangles_) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 u = points_[tri[(i + 1) % 3]] - points_[tri[i]];
      const Vec2 v = points_[tri[(i + 2) % 3]] - points_[tri[i]];
      const double ang = std::atan2(std::abs(cross(u, v)), u.dot(v));
      best = std::min(best, ang * 180.0 / std::numbers::pi);
    }
  }
  return best;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (double x : areas_) a += x;
  return a;
}

std::optional<PointLocation> Mesh::locate(const Vec2& x) const {
  const int i = static_cast<int>(std::floor((x.x() - lo_.x()) / cell_.x()));
  const int j = static_cast<int>(std::floor((x.y() - lo_.y()) / cell_.y()));
  constexpr double slack = 1e-10;
  if (i < -1 || j < -1 || i > nx_ || j > ny_) return std::nullopt;
  std::optional<PointLocation> best;
  double best_min = -slack;
  for (int jj = std::max(0, j - 1); jj <= std::min(ny_ - 1, j + 1); ++jj) {
    for (int ii = std::max(0, i - 1); ii <= std::min(nx_ - 1, i + 1); ++ii) {
      for (int t : buckets_[static_cast<std::size_t>(jj) * nx_ + ii]) {
        const auto& tri = triangles_[t];
        const Vec2& p0 = points_[tri[0]];
        const Vec2 d = x - p0;
        const double l1 = grads_[t].col(1).dot(d);
        const double l2 = grads_[t].col(2).dot(d);
        const double l0 = 1.0 - l1 - l2;
        const double m = std::min({l0, l1, l2});
        if (m >= best_min) {
          best_min = m;
          best = PointLocation{t, {l0, l1, l2}};
          if (m >= 0.0) return best;
        }
      }
    }
  }
  return best;
}

std::shared_ptr<const Mesh> mesh_polygon(const ConvexPolygon& domain, double h) {
  if (domain.is_degenerate()) throw Error(ErrorKind::InvalidBody, "mesh needs a polygon with interior");
  const double diam = domain.diameter();
  if (!(h > 0.0) || h >= diam / 4.0) throw Error(ErrorKind::InvalidConfig, "mesh size must satisfy 0 < h < diam/4");

  std::vector<Vec2> pts;
  const auto& v = domain.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / h - 1e-9)));
    for (int k = 0; k < m; ++k) pts.push_back(a + (b - a) * (static_cast<double>(k) / m));
  }
  const std::size_t n_boundary = pts.size();

  auto edge_distance = [&](const Vec2& x) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 e = v[(i + 1) % v.size()] - v[i];
      d = std::min(d, cross(e, x - v[i]) / e.norm());
    }
    return d;
  };

  Vec2 lo = v.front(), hi = v.front();
  for (const auto& p : v) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double dy = h * std::sqrt(3.0) / 2.0;
  const int rows = static_cast<int>(std::ceil((hi.y() - lo.y()) / dy)) + 1;
  const int cols = static_cast<int>(std::ceil((hi.x() - lo.x()) / h)) + 2;
  for (int r = 0; r < rows; ++r) {
    const double y = lo.y() + r * dy;
    const double shift = (r % 2) ? 0.5 * h : 0.0;
    for (int c = -1; c < cols; ++c) {
      const Vec2 x(lo.x() + shift + c * h, y);
      if (edge_distance(x) >= 0.55 * h) pts.push_back(x);
    }
  }

  std::vector<std::array<int, 3>> tris = delaunay(pts);
  for (int round = 0; round < 4; ++round) {
    std::vector<std::vector<int>> nbr(pts.size());
    for (const auto& t : tris) {
      for (int i = 0; i < 3; ++i) {
        nbr[t[i]].push_back(t[(i + 1) % 3]);
        nbr[t[i]].push_back(t[(i + 2) % 3]);
      }
    }
    std::vector<Vec2> next = pts;
    for (std::size_t i = n_boundary; i < pts.size(); ++i) {
      if (nbr[i].empty()) continue;
      Vec2 s = Vec2::Zero();
      for (int j : nbr[i]) s += pts[j];
      next[i] = s / static_cast<double>(nbr[i].size());
    }
    pts = std::move(next);
    tris = delaunay(pts);
  }

  std::vector<bool> boundary(pts.size(), false);
  for (std::size_t i = 0; i < n_boundary; ++i) boundary[i] = true;
  auto mesh = std::make_shared<Mesh>(domain, std::move(pts), std::move(tris), std::move(boundary), h);
  if (std::abs(mesh->total_area() - domain.area()) > 1e-9 * domain.area()) {
    throw Error(ErrorKind::InvalidBody, "triangulation does not cover the domain");
  }
  return mesh;
}

ScalarField::ScalarField(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_ || static_cast<std::size_t>(values_.size()) != mesh_->n_points()) {
    throw Error(ErrorKind::InvalidConfig, "field size does not match its mesh");
  }
}

std::optional<double> ScalarField::value(const Vec2& x) const {
  const auto loc = mesh_->locate(x);
  if (!loc) return std::nullopt;
  const auto& tri = mesh_->triangles()[loc->triangle];
  return loc->barycentric[0] * values_[tri[0]] + loc->barycentric[1] * values_[tri[1]] +
         loc->barycentric[2] * values_[tri[2]];
}

Vec2 ScalarField::gradient(int triangle) const {
  const auto& tri = mesh_->triangles()[triangle];
  const auto& g = mesh_->hat_gradients(triangle);
  return g.col(0) * values_[tri[0]] + g.col(1) * values_[tri[1]] + g.col(2) * values_[tri[2]];
}

int ScalarField::argmax_node() const {
  Eigen::Index i;
  values_.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace convfold
