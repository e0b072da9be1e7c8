#include "convfold/folding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "convfold/parallel.hpp"

namespace convfold {

ConvexPolygon cap(const ConvexPolygon& k, const Cut2& cut) { return clip_above(k, cut); }

ConvexPolytope cap(const ConvexPolytope& k, const Cut3& cut) {
  return k.clipped(-cut.omega.vector(), -cut.lambda);
}

namespace {

bool polygon_contains_all(const ConvexPolygon& k, const std::vector<Vec2>& pts, double tol) {
  for (const auto& p : pts) {
    if (!k.contains(p, tol)) return false;
  }
  return true;
}

bool foldable_with_tol(const ConvexPolygon& k, const Cut2& cut, double tol) {
  const ConvexPolygon c = cap(k, cut);
  if (c.empty()) return true;
  std::vector<Vec2> r;
  r.reserve(c.size());
  for (const auto& v : c.vertices()) r.push_back(reflect(v, cut));
  return polygon_contains_all(k, r, tol);
}

bool foldable_with_tol(const ConvexPolytope& k, const Cut3& cut, double tol) {
  const ConvexPolytope c = cap(k, cut);
  if (c.empty()) return true;
  for (const auto& v : c.vertices()) {
    if (!k.contains(reflect(v, cut), tol)) return false;
  }
  return true;
}

template <class Body, int N>
FoldProfile<N> profile_impl(const Body& k, const Direction<N>& omega) {
  if (k.empty()) throw Error(ErrorKind::EmptyBody, "folding profile of an empty body");
  const double tol = k.tolerance();
  const double top = support(k, omega);
  double lo = -support(k, -omega);
  double hi = top;
  if (foldable_with_tol(k, Cut<N>(lo, omega), tol)) return {omega, lo, top - lo};
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (foldable_with_tol(k, Cut<N>(mid, omega), tol)) hi = mid; else lo = mid;
  }
  return {omega, hi, top - hi};
}

}  // namespace

bool is_foldable(const ConvexPolygon& k, const Cut2& cut) { return foldable_with_tol(k, cut, k.tolerance()); }
bool is_foldable(const ConvexPolytope& k, const Cut3& cut) { return foldable_with_tol(k, cut, k.tolerance()); }

FoldProfile2 folding_profile(const ConvexPolygon& k, const Direction2& omega) {
  if (k.is_degenerate()) throw Error(ErrorKind::InvalidBody, "folding profile needs a polygon with interior");
  return profile_impl(k, omega);
}

FoldProfile3 folding_profile(const ConvexPolytope& k, const Direction3& omega) {
  if (k.is_degenerate()) throw Error(ErrorKind::InvalidBody, "folding profile needs a polytope with interior");
  return profile_impl(k, omega);
}

std::vector<Direction2> uniform_directions(int n) {
  std::vector<Direction2> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(direction_from_angle(2.0 * std::numbers::pi * i / n));
  return out;
}

std::vector<Direction3> fibonacci_directions(int n) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Direction3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(Vec3(r * std::cos(phi), r * std::sin(phi), z));
  }
  return out;
}

bool HeartApprox2::contains(const Vec2& x, double tol) const { return body.contains(x, tol); }

bool HeartApprox3::contains(const Vec3& x, double tol) const {
  if (!domain.contains(x, tol)) return false;
  for (const auto& p : profiles) {
    if (p.omega.vector().dot(x) > p.lambda_min + tol) return false;
  }
  return true;
}

HeartApprox2 heart(const ConvexPolygon& k, int n_directions) {
  if (n_directions < 16) throw Error(ErrorKind::InvalidConfig, "heart needs at least 16 directions");
  const auto dirs = uniform_directions(n_directions);
  HeartApprox2 h;
  h.directions_used = n_directions;
  h.profiles = parallel_map(dirs.size(), [&](std::size_t i) { return folding_profile(k, dirs[i]); });
  // Offsets are relaxed by the containment tolerance so that the approximation stays outer.
  const double tol = k.tolerance();
  h.body = k;
  for (const auto& p : h.profiles) {
    if (h.body.empty()) break;
    h.body = clip_below(h.body, Cut2(p.lambda_min + tol, p.omega));
  }
  return h;
}

HeartApprox3 heart(const ConvexPolytope& k, int n_directions) {
  if (n_directions < 16) throw Error(ErrorKind::InvalidConfig, "heart needs at least 16 directions");
  const auto dirs = fibonacci_directions(n_directions);
  HeartApprox3 h;
  h.directions_used = n_directions;
  h.domain = k;
  h.profiles = parallel_map(dirs.size(), [&](std::size_t i) { return folding_profile(k, dirs[i]); });
  const double tol = k.tolerance();
  h.body = k;
  for (const auto& p : h.profiles) {
    if (h.body.empty()) break;
    h.body = h.body.clipped(p.omega.vector(), p.lambda_min + tol);
  }
  return h;
}

LemmaFoldReport lemma_fold_check(const ConvexPolygon& k, const Cut2& cut, double tol) {
  if (k.is_degenerate()) throw Error(ErrorKind::InvalidBody, "lemma check needs a polygon with interior");
  if (!section_is_shadow(k, cut)) throw Error(ErrorKind::NotAShadow, "section at the cut is not a shadow of K");
  LemmaFoldReport r;
  const Direction2& w = cut.omega;
  r.lambda = cut.lambda;
  r.h_plus = support(k, w);
  r.h_minus = support(k, -w);
  r.breadth = r.h_plus + r.h_minus;
  r.quarter_breadth = 0.25 * r.breadth;
  r.f_plus = folding_profile(k, w).height;
  r.f_minus = folding_profile(k, -w).height;
  r.bound_holds = std::max(r.f_plus, r.f_minus) >= r.quarter_breadth - tol;
  const double lambda1 = 0.5 * (r.h_plus + cut.lambda);
  const double lambda2 = 0.5 * (r.h_minus - cut.lambda);
  r.claim_caps_foldable = is_foldable(k, Cut2(lambda1, w)) && is_foldable(k, Cut2(lambda2, -w));
  r.media_holds = cut.lambda <= 0.5 * (r.h_plus - r.h_minus) + tol;
  r.mu = r.h_plus - r.quarter_breadth;
  r.passed = r.bound_holds && r.claim_caps_foldable;
  if (r.media_holds) {
    r.mu_foldable = is_foldable(k, Cut2(r.mu, w));
    r.mu_margin_holds = r.mu >= cut.lambda + r.quarter_breadth - tol;
    r.passed = r.passed && r.mu_foldable && r.mu_margin_holds;
  }
  return r;
}

RectangleReport rectangle_rigidity_check(const ConvexPolygon& k, const Cut2& cut, double delta, int n_samples) {
  if (k.is_degenerate()) throw Error(ErrorKind::InvalidBody, "rectangle check needs a polygon with interior");
  if (!section_is_shadow(k, cut)) throw Error(ErrorKind::NotAShadow, "section at the cut is not a shadow of K");
  if (!(delta > 0.0) || n_samples < 1) throw Error(ErrorKind::InvalidConfig, "delta and sample count must be positive");
  RectangleReport r;
  const double tol = k.tolerance();
  const double diam = k.diameter();
  const Direction2& wb = cut.omega;
  const Vec2 wp = perp(wb.vector());

  // Half-slab between the cut and the midpoint of the cap.
  const double upper = 0.5 * (cut.lambda + support(k, wb));
  const ConvexPolygon slab = clip_below(cap(k, cut), Cut2(upper, wb));
  if (!slab.is_degenerate()) {
    double a0 = std::numeric_limits<double>::infinity(), a1 = -a0, b0 = a0, b1 = -a0;
    for (const auto& v : slab.vertices()) {
      a0 = std::min(a0, v.dot(wb.vector()));
      a1 = std::max(a1, v.dot(wb.vector()));
      b0 = std::min(b0, v.dot(wp));
      b1 = std::max(b1, v.dot(wp));
    }
    const double box_area = (a1 - a0) * (b1 - b0);
    r.rectangle = box_area - slab.area() <= tol * 2.0 * ((a1 - a0) + (b1 - b0));
  }

  const ConvexPolygon c = cap(k, cut);
  r.f_bar = folding_profile(c, wb).height;
  const double theta0 = std::atan2(wb[1], wb[0]);
  r.worst_slack = std::numeric_limits<double>::infinity();
  r.two_sided_holds = true;
  double near_min = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n_samples; ++i) {
    // Geometric spacing concentrates samples near the limit direction.
    const double mag = delta * std::pow(0.5, static_cast<double>(n_samples - i) * 20.0 / n_samples);
    const double floor = r.f_bar - tol - 2.0 * diam * mag;
    const double f_lo = folding_profile(c, direction_from_angle(theta0 - mag)).height;
    const double f_hi = folding_profile(c, direction_from_angle(theta0 + mag)).height;
    r.samples += 2;
    const double slack = std::max(f_lo, f_hi) - floor;
    if (slack < r.worst_slack) {
      r.worst_slack = slack;
      r.worst_angle = mag;
    }
    if (std::min(f_lo, f_hi) < floor) r.two_sided_holds = false;
    if (i <= 4) near_min = std::min(near_min, std::max(f_lo, f_hi));
  }
  r.near_min_ratio = r.f_bar > 0 ? near_min / r.f_bar : 1.0;
  r.surrogate_holds = r.worst_slack >= 0.0;
  r.passed = r.rectangle || r.surrogate_holds;
  r.note = "finite-angle surrogate, one-sided in the tilt: evidence, not proof";
  return r;
}

}  // namespace convfold
