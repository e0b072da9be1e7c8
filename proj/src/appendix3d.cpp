#include "convfold/appendix3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "convfold/parallel.hpp"

namespace convfold {

std::vector<Vec3> kalpha_vertices(double alpha) {
  return {Vec3(0, alpha, 0), Vec3(0, -alpha, 0), Vec3(1, 0, alpha), Vec3(1, 0, -alpha)};
}

ConvexPolytope build_kalpha(const KAlphaSpec& spec) {
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) {
    throw Error(ErrorKind::InvalidAlpha, "alpha must be positive");
  }
  if (!(spec.scale > 0.0)) throw Error(ErrorKind::InvalidBody, "scale must be positive");
  const double a = spec.alpha;
  const std::vector<std::pair<Vec3, double>> halfspaces = {
      {Vec3(-a, 0, 1), 0.0},
      {Vec3(-a, 0, -1), 0.0},
      {Vec3(a, 1, 0), a},
      {Vec3(a, -1, 0), a},
  };
  const Vec3 pad = Vec3::Constant(0.5 + a);
  const ConvexPolytope base = ConvexPolytope::from_halfspaces(halfspaces, Vec3(0, -a, -a) - pad, Vec3(1, a, a) + pad);
  return base.transformed(spec.scale, spec.offset);
}

Vec3 kalpha_symmetry(int which, const Vec3& x) {
  switch (which) {
    case 0: return Vec3(x.x(), x.y(), -x.z());
    case 1: return Vec3(x.x(), -x.y(), x.z());
    case 2: return Vec3(1.0 - x.x(), x.z(), x.y());
    default: throw Error(ErrorKind::InvalidConfig, "symmetry index must be 0, 1 or 2");
  }
}

namespace {

std::vector<FoldProfile3> sweep_profiles(const ConvexPolytope& k, int n_directions) {
  const auto dirs = fibonacci_directions(n_directions);
  return parallel_map(dirs.size(), [&](std::size_t i) { return folding_profile(k, dirs[i]); });
}

}  // namespace

FoldingBoundReport verify_folding_bound(const KAlphaSpec& spec, int n_directions, double tol) {
  const ConvexPolytope k = build_kalpha(spec);
  FoldingBoundReport r;
  r.alpha = spec.alpha;
  r.scale = spec.scale;
  r.n_directions = n_directions;
  r.bound = 2.0 * spec.alpha * spec.scale;
  r.max_height = -1.0;
  for (const auto& p : sweep_profiles(k, n_directions)) {
    if (p.height > r.max_height) {
      r.max_height = p.height;
      r.worst_direction = p.omega.vector();
    }
  }
  const Direction3 e2(Vec3(0, 1, 0));
  const double half = spec.offset.y() + 0.5 * spec.alpha * spec.scale;
  r.floor_height = folding_profile(k, e2).height;
  r.floor_holds = is_foldable(k, Cut3(half, e2)) && r.floor_height >= 0.5 * spec.alpha * spec.scale - tol;
  r.passed = r.max_height <= r.bound + tol && r.floor_holds;
  return r;
}

double cap_axis_sup(const KAlphaSpec& spec, const Cut3& cut) {
  const Vec3& w = cut.omega.vector();
  const double base = spec.offset.dot(w);
  const double slope = spec.scale * w.x();
  constexpr double none = -std::numeric_limits<double>::infinity();
  // Cap condition on the axis: base + slope t >= lambda for t in [0, 1].
  if (slope > 0.0) return base + slope >= cut.lambda ? 1.0 : none;
  if (slope == 0.0) return base >= cut.lambda ? 1.0 : none;
  const double tau = (cut.lambda - base) / slope;
  if (tau < 0.0) return none;
  return std::min(1.0, tau);
}

TbarReport verify_tbar_bound(const KAlphaSpec& spec, int n_directions, double tol) {
  const ConvexPolytope k = build_kalpha(spec);
  const double a = spec.alpha;
  TbarReport r;
  r.alpha = a;
  r.n_directions = n_directions;
  r.bound = a * (std::sqrt(2.0 * a * a + 1.0) - a);
  r.untested_alpha = a > 0.05;
  r.max_sup = -std::numeric_limits<double>::infinity();
  const Vec3 z1 = spec.offset + spec.scale * Vec3(0, a, 0);
  const double ktol = k.tolerance();
  bool ok = true;
  for (const auto& p : sweep_profiles(k, n_directions)) {
    if (z1.dot(p.omega.vector()) <= p.lambda_min + ktol) continue;
    ++r.caps_checked;
    const double sup = cap_axis_sup(spec, Cut3(p.lambda_min, p.omega));
    if (sup == -std::numeric_limits<double>::infinity()) continue;
    ++r.caps_meeting_axis;
    if (sup > r.max_sup) {
      r.max_sup = sup;
      r.worst_direction = p.omega.vector();
    }
    if (sup > r.bound + tol) ok = false;
  }
  r.passed = ok;
  return r;
}

HeartSegmentReport verify_heart_segment(const KAlphaSpec& spec, int n_directions, int n_points, double tol) {
  if (n_points < 2) throw Error(ErrorKind::InvalidConfig, "need at least two segment points");
  const ConvexPolytope k = build_kalpha(spec);
  const double a = spec.alpha;
  HeartSegmentReport r;
  r.alpha = a;
  r.n_directions = n_directions;
  r.n_points = n_points;
  std::vector<Vec3> pts;
  for (int i = 0; i < n_points; ++i) {
    const double t = 2.0 * a + (1.0 - 4.0 * a) * i / (n_points - 1);
    pts.push_back(spec.offset + spec.scale * Vec3(t, 0, 0));
  }
  const auto profiles = sweep_profiles(k, n_directions);
  const double ktol = k.tolerance();
  std::vector<bool> removed(pts.size(), false);
  r.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& p : profiles) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double margin = p.lambda_min - p.omega.vector().dot(pts[i]);
      r.min_margin = std::min(r.min_margin, margin);
      if (margin < -tol) removed[i] = true;
    }
    if (p.omega.vector().dot(spec.offset) > p.lambda_min + ktol) r.apex_removed = true;
  }
  r.points_removed = static_cast<int>(std::count(removed.begin(), removed.end(), true));
  HeartApprox3 h;
  h.directions_used = n_directions;
  h.domain = k;
  h.profiles = profiles;
  r.heart_body_contains_segment = std::all_of(pts.begin(), pts.end(), [&](const Vec3& x) { return h.contains(x, ktol); });
  r.passed = r.points_removed == 0 && r.heart_body_contains_segment;
  return r;
}

ConvexPolytope build_sequence_body(int n, double* l_out, double* alpha_out) {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "sequence index must be at least 1");
  const double l = 1.0 + 1.0 / n;
  const double alpha = (l - 1.0) / (4.0 * l * l);
  if (l_out) *l_out = l;
  if (alpha_out) *alpha_out = alpha;
  return build_kalpha({alpha, l, Vec3(-2.0 * alpha * l, 0, 0)});
}

SequenceReport build_sequence_example(int n, int n_directions) {
  SequenceReport r;
  r.n = n;
  r.n_directions = n_directions;
  const ConvexPolytope k = build_sequence_body(n, &r.l, &r.alpha);
  r.constraint = r.l * (1.0 - 4.0 * r.alpha * r.l);
  const ConvexPolytope segment = ConvexPolytope::degenerate({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  r.hausdorff = hausdorff_distance(k, segment);
  r.hausdorff_bound = 1.0 / n;
  const double tol = k.tolerance();
  r.min_margin = std::numeric_limits<double>::infinity();
  r.heart_contains_segment = true;
  for (const auto& p : sweep_profiles(k, n_directions)) {
    const Vec3& w = p.omega.vector();
    const double top = std::max(0.0, w.x());
    const double margin = p.lambda_min - top;
    r.min_margin = std::min(r.min_margin, margin);
    if (margin <= 0.0) ++r.foldable_caps_meeting_segment;
    if (margin < -tol) r.heart_contains_segment = false;
  }
  r.passed = r.constraint >= 1.0 - 1e-12 && r.hausdorff <= r.hausdorff_bound && r.foldable_caps_meeting_segment == 0 &&
             r.heart_contains_segment;
  return r;
}

std::string polytope_to_obj(const ConvexPolytope& k) {
  std::ostringstream out;
  out.precision(17);
  out << "# convex polytope: " << k.vertices().size() << " vertices, " << k.faces().size() << " faces\n";
  for (const auto& v : k.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  const double tol = k.tolerance();
  for (const auto& f : k.faces()) {
    out << 'f';
    for (const auto& p : f.loop) {
      std::size_t best = 0;
      double dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < k.vertices().size(); ++i) {
        const double d = (k.vertices()[i] - p).norm();
        if (d < dist) {
          dist = d;
          best = i;
        }
      }
      if (dist > 10.0 * tol) throw Error(ErrorKind::InvalidBody, "facet vertex missing from the vertex list");
      out << ' ' << best + 1;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace convfold
