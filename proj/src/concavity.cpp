#include "convfold/concavity.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "convfold/corpus.hpp"
#include "convfold/folding.hpp"

namespace convfold {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inverts a strictly increasing function on (0, inf) by bracketing and TOMS 748.
double invert_increasing(const std::function<double(double)>& fn, double s) {
  double lo = 1.0, hi = 1.0;
  while (fn(lo) > s && lo > 1e-300) lo *= 0.5;
  while (fn(hi) < s && hi < 1e300) hi *= 2.0;
  if (fn(lo) > s || fn(hi) < s) throw Error(ErrorKind::InvalidConfig, "value outside the range of the transform");
  if (fn(lo) == s) return lo;
  if (fn(hi) == s) return hi;
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve([&](double t) { return fn(t) - s; }, lo, hi,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

TransformSpec phi_transform(const Reaction& reaction) {
  const double p = reaction.p;
  if (!(p > 1.0)) throw Error(ErrorKind::InvalidReaction, "p must be greater than 1");
  if (reaction.kind == Reaction::Kind::Torsion) {
    const double k = p / (p - 1.0), e = 1.0 - 1.0 / p;
    std::ostringstream s;
    s << "phi(t) = " << k << " (t^" << e << " - 1)";
    return TransformSpec(
        TransformKind::Phi, p, [=](double t) { return k * (std::pow(std::max(t, 0.0), e) - 1.0); },
        [=](double v) { return std::pow(std::max(1.0 + v / k, 0.0), 1.0 / e); }, true, s.str());
  }
  if (reaction.kind == Reaction::Kind::Power) {
    if (!(reaction.c > 0.0) || !(reaction.q > 0.0)) throw Error(ErrorKind::InvalidReaction, "power needs c, q > 0");
    const double a = std::pow(reaction.q / reaction.c, 1.0 / p);  // F^(-1/p) = a t^(-q/p)
    const double e = 1.0 - reaction.q / p;
    if (e <= 0.0) {
      // F^(-1/p) ~ t^(-q/p) is not integrable at 0; phi is still defined on (0, inf).
      if (e == 0.0) {
        return TransformSpec(
            TransformKind::Phi, p, [=](double t) { return t > 0.0 ? a * std::log(t) : -kInf; },
            [=](double v) { return std::exp(v / a); }, true, "phi(t) = a log t");
      }
      return TransformSpec(
          TransformKind::Phi, p, [=](double t) { return t > 0.0 ? a * (std::pow(t, e) - 1.0) / e : -kInf; },
          [=](double v) { return std::pow(1.0 + v * e / a, 1.0 / e); }, true, "phi(t) = a (t^e - 1) / e");
    }
    std::ostringstream s;
    s << "phi(t) = " << a / e << " (t^" << e << " - 1)";
    return TransformSpec(
        TransformKind::Phi, p, [=](double t) { return a * (std::pow(std::max(t, 0.0), e) - 1.0) / e; },
        [=](double v) { return std::pow(std::max(1.0 + v * e / a, 0.0), 1.0 / e); }, true, s.str());
  }
  // Tabulated: quadrature of F^(-1/p).
  reaction.validate();
  const Reaction r = reaction;
  const double d = 1e-12;
  const double local_exponent = std::log(r.F(2.0 * d) / r.F(d)) / std::log(2.0);
  if (!(r.F(d) > 0.0) || local_exponent / p >= 1.0) {
    throw Error(ErrorKind::DivergentIntegral, "F^(-1/p) is not integrable at 0");
  }
  auto integrand = [r, p](double t) { return std::pow(r.F(t), -1.0 / p); };
  auto fwd = [integrand](double t) {
    static thread_local boost::math::quadrature::tanh_sinh<double> ts;
    if (t == 1.0) return 0.0;
    const double lo = std::min(std::max(t, 0.0), 1.0), hi = std::max(t, 1.0);
    const double v = ts.integrate(integrand, lo, hi, 1e-12);
    return t < 1.0 ? -v : v;
  };
  auto inv = [fwd](double s) { return invert_increasing(fwd, s); };
  return TransformSpec(TransformKind::Phi, p, fwd, inv, false, "phi(t) = int_1^t F^(-1/p), tanh-sinh quadrature");
}

TransformSpec log_transform() {
  return TransformSpec(
      TransformKind::Log, 0.0, [](double t) { return t > 0.0 ? std::log(t) : -kInf; },
      [](double s) { return std::exp(s); }, true, "log t");
}

TransformSpec power_concavity_transform(double p) {
  if (!(p > 1.0)) throw Error(ErrorKind::InvalidReaction, "p must be greater than 1");
  const double e = 1.0 - 1.0 / p;
  std::ostringstream s;
  s << "t^" << e;
  return TransformSpec(
      TransformKind::PowerConcavity, p, [e](double t) { return std::pow(std::max(t, 0.0), e); },
      [e](double v) { return std::pow(std::max(v, 0.0), 1.0 / e); }, true, s.str());
}

ScalarField apply_transform(const ScalarField& u, const TransformSpec& tr) {
  Eigen::VectorXd v(u.values().size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = tr(std::max(u.values()[i], 0.0));
  return ScalarField(u.mesh_ptr(), std::move(v));
}

HypothesisReport check_hypotheses(const Reaction& reaction, int n_points, double scale) {
  if (n_points < 3) throw Error(ErrorKind::InvalidConfig, "need at least three sample points");
  const double p = reaction.p;
  HypothesisReport rep;
  rep.n_points = n_points;
  rep.t_min = 1e-6 * scale;
  rep.t_max = 1e3 * scale;
  std::vector<double> t(n_points), s(n_points);
  for (int i = 0; i < n_points; ++i) {
    s[i] = std::log(rep.t_min) + (std::log(rep.t_max) - std::log(rep.t_min)) * i / (n_points - 1);
    t[i] = std::exp(s[i]);
  }
  constexpr double tol = 1e-8;
  auto record = [](HypothesisCheck& c, double violation, double at) {
    if (violation > c.worst_violation) {
      c.worst_violation = violation;
      c.worst_at = at;
    }
  };

  rep.ratio_nonincreasing.name = "f(t)/t^(p-1) nonincreasing";
  std::vector<double> ratio(n_points);
  for (int i = 0; i < n_points; ++i) ratio[i] = reaction.f(t[i]) / std::pow(t[i], p - 1.0);
  for (int i = 0; i + 1 < n_points; ++i) {
    const double rise = (ratio[i + 1] - ratio[i]) / std::max(std::abs(ratio[i]), std::abs(ratio[i + 1]));
    if (rise > tol) record(rep.ratio_nonincreasing, rise, t[i]);
  }

  // Second differences: nonuniform grid in t, uniform in s.
  auto second = [&](const std::vector<double>& x, const std::vector<double>& y, HypothesisCheck& c, double sign) {
    for (int i = 1; i + 1 < n_points; ++i) {
      const double s1 = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
      const double s2 = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
      const double bend = sign * (s2 - s1) / std::max(std::abs(s1) + std::abs(s2), 1e-300);
      if (bend < -tol) record(c, -bend, t[i]);
    }
  };

  rep.exp_ratio_convex.name = "e^((p-1)s)/f(e^s) convex";
  std::vector<double> g(n_points);
  for (int i = 0; i < n_points; ++i) g[i] = std::exp((p - 1.0) * s[i]) / reaction.f(t[i]);
  second(s, g, rep.exp_ratio_convex, 1.0);

  rep.root_concave.name = "F^(1/p) concave";
  std::vector<double> root(n_points);
  for (int i = 0; i < n_points; ++i) root[i] = std::pow(std::max(reaction.F(t[i]), 0.0), 1.0 / p);
  second(t, root, rep.root_concave, -1.0);

  rep.quotient_convex.name = "F/f convex";
  std::vector<double> quo(n_points);
  for (int i = 0; i < n_points; ++i) quo[i] = reaction.F(t[i]) / reaction.f(t[i]);
  second(t, quo, rep.quotient_convex, 1.0);

  for (HypothesisCheck* c : {&rep.ratio_nonincreasing, &rep.exp_ratio_convex, &rep.root_concave,
                             &rep.quotient_convex}) {
    c->holds = c->worst_violation == 0.0;
  }
  return rep;
}

QuasiConcavityReport check_quasiconcave(const ScalarField& u, int n_levels, double defect_tol) {
  if (n_levels < 1) throw Error(ErrorKind::InvalidConfig, "need at least one level");
  QuasiConcavityReport r;
  r.n_levels = n_levels;
  r.tolerance = defect_tol;
  const double top = u.max();
  r.passed = true;
  for (int i = 1; i <= n_levels; ++i) {
    const double t = top * i / (n_levels + 1);
    const LevelSet ls = level_set(u, t, defect_tol);
    r.max_components = std::max(r.max_components, static_cast<int>(ls.contours.size()));
    if (i == 1 || ls.defect > r.worst_defect) {
      r.worst_defect = ls.defect;
      r.worst_level = t;
    }
    if (!ls.convex) r.passed = false;
  }
  return r;
}

namespace {

// Single-linkage clusters of points closer than `dist`, via a spatial hash.
std::vector<std::vector<int>> cluster(const std::vector<Vec2>& pts, double dist) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  auto cell_key = [&](long i, long j) { return i * 73856093L ^ j * 19349663L; };
  std::unordered_map<long, std::vector<int>> grid;
  auto cell = [&](const Vec2& x) {
    return std::pair<long, long>(static_cast<long>(std::floor(x.x() / dist)), static_cast<long>(std::floor(x.y() / dist)));
  };
  for (int k = 0; k < n; ++k) {
    const auto [ci, cj] = cell(pts[k]);
    grid[cell_key(ci, cj)].push_back(k);
  }
  for (int k = 0; k < n; ++k) {
    const auto [ci, cj] = cell(pts[k]);
    for (long di = -1; di <= 1; ++di) {
      for (long dj = -1; dj <= 1; ++dj) {
        const auto it = grid.find(cell_key(ci + di, cj + dj));
        if (it == grid.end()) continue;
        for (int m : it->second) {
          if (m > k && (pts[m] - pts[k]).norm() < dist) parent[find(m)] = find(k);
        }
      }
    }
  }
  std::vector<std::vector<int>> out;
  std::unordered_map<int, std::size_t> slot;
  for (int k = 0; k < n; ++k) {
    const int root = find(k);
    auto it = slot.find(root);
    if (it == slot.end()) {
      it = slot.emplace(root, out.size()).first;
      out.emplace_back();
    }
    out[it->second].push_back(k);
  }
  return out;
}

}  // namespace

CriticalReport count_critical_points(const ScalarField& u, double grad_threshold, double argmax_epsilon_rel) {
  const Mesh& m = u.mesh();
  const auto& val = u.values();
  CriticalReport r;
  r.cluster_distance = 3.0 * m.h();
  r.grad_threshold = grad_threshold;
  std::vector<Vec2> maxima;
  for (std::size_t i = 0; i < m.n_points(); ++i) {
    if (m.boundary()[i] || !std::isfinite(val[i])) continue;
    bool is_max = true;
    for (int j : m.node_neighbours()[i]) {
      if (val[j] > val[i]) {
        is_max = false;
        break;
      }
    }
    if (is_max) maxima.push_back(m.points()[i]);
  }
  for (const auto& c : cluster(maxima, r.cluster_distance)) {
    Vec2 center = Vec2::Zero();
    for (int k : c) center += maxima[k];
    center /= static_cast<double>(c.size());
    double radius = 0.0;
    for (int k : c) radius = std::max(radius, (maxima[k] - center).norm());
    r.centers.push_back(center);
    r.radii.push_back(radius);
  }
  r.count = static_cast<int>(r.centers.size());

  double gmax = 0.0;
  for (std::size_t t = 0; t < m.n_triangles(); ++t) gmax = std::max(gmax, u.gradient(static_cast<int>(t)).norm());
  std::vector<Vec2> flat;
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    if (m.boundary()[tri[0]] || m.boundary()[tri[1]] || m.boundary()[tri[2]]) continue;
    if (u.gradient(static_cast<int>(t)).norm() < grad_threshold * gmax) {
      flat.push_back((m.points()[tri[0]] + m.points()[tri[1]] + m.points()[tri[2]]) / 3.0);
    }
  }
  r.low_gradient_clusters = static_cast<int>(cluster(flat, r.cluster_distance).size());

  double lowest = u.max();
  for (Eigen::Index i = 0; i < val.size(); ++i) {
    if (std::isfinite(val[i])) lowest = std::min(lowest, val[i]);
  }
  r.argmax_epsilon = argmax_epsilon_rel * (u.max() - lowest);
  if (r.argmax_epsilon > 0.0) r.argmax_diameter = argmax_set(u, r.argmax_epsilon).diameter;
  return r;
}

ConcavityReport check_strict_concavity(const std::function<double(const Vec2&)>& v, const ConvexPolygon& domain,
                                       double h, const ConcavityOptions& options) {
  if (domain.is_degenerate()) throw Error(ErrorKind::InvalidBody, "concavity check needs a polygon with interior");
  if (options.n_segments < 1) throw Error(ErrorKind::InvalidConfig, "need at least one segment");
  ConcavityReport r;
  r.seed = options.seed;
  const auto& vert = domain.vertices();
  Vec2 lo = vert.front(), hi = vert.front();
  for (const auto& x : vert) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double margin = options.margin_factor * h;
  const double min_len = options.min_length_factor * h;
  auto inside = [&](const Vec2& x) {
    for (std::size_t i = 0; i < vert.size(); ++i) {
      const Vec2 e = vert[(i + 1) % vert.size()] - vert[i];
      if (cross(e, x - vert[i]) / e.norm() < margin) return false;
    }
    return true;
  };
  std::mt19937_64 rng(options.seed);
  auto draw = [&]() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const Vec2 x(lo.x() + uniform01(rng) * (hi.x() - lo.x()), lo.y() + uniform01(rng) * (hi.y() - lo.y()));
      if (inside(x)) return x;
    }
    throw Error(ErrorKind::InvalidConfig, "domain interior too thin for the segment margin");
  };
  r.min_gap = kInf;
  r.min_normalized_gap = kInf;
  while (r.n_segments < options.n_segments) {
    const Vec2 x = draw(), y = draw();
    const double len = (x - y).norm();
    if (len < min_len) {
      ++r.rejected;
      if (r.rejected > 100 * options.n_segments) throw Error(ErrorKind::InvalidConfig, "segments too short");
      continue;
    }
    const double vx = v(x), vy = v(y), vm = v(0.5 * (x + y));
    if (!std::isfinite(vx) || !std::isfinite(vy) || !std::isfinite(vm)) {
      ++r.rejected;
      if (r.rejected > 100 * options.n_segments) throw Error(ErrorKind::InvalidConfig, "field not finite inside");
      continue;
    }
    ++r.n_segments;
    r.scale = std::max({r.scale, std::abs(vx), std::abs(vy), std::abs(vm)});
    const double gap = vm - 0.5 * (vx + vy);
    if (gap < r.min_gap) {
      r.min_gap = gap;
      r.worst_x = x;
      r.worst_y = y;
    }
    r.min_normalized_gap = std::min(r.min_normalized_gap, gap / (len * len));
  }
  r.strict = r.min_gap > options.gap_threshold * r.scale;
  r.concave = r.min_gap >= -options.concave_tol * r.scale;
  return r;
}

ConcavityReport check_strict_concavity(const ScalarField& v, const ConcavityOptions& options) {
  return check_strict_concavity(
      [&v](const Vec2& x) {
        const auto y = v.value(x);
        return y ? *y : std::numeric_limits<double>::quiet_NaN();
      },
      v.mesh().domain(), v.mesh().h(), options);
}

PiconeReport picone_check(const ScalarField& v, const ScalarField& w, double p, double tol) {
  if (&v.mesh() != &w.mesh()) throw Error(ErrorKind::InvalidConfig, "fields must share a mesh");
  if (!(p > 1.0)) throw Error(ErrorKind::InvalidReaction, "p must be greater than 1");
  const Mesh& m = v.mesh();
  for (std::size_t i = 0; i < m.n_points(); ++i) {
    if (m.boundary()[i]) continue;
    if (!(v.values()[i] > 0.0) || !(w.values()[i] > 0.0)) {
      throw Error(ErrorKind::NonPositiveField, "fields must be positive at interior nodes");
    }
  }
  PiconeReport r;
  r.p = p;
  r.min_slack = kInf;
  r.min_relative_slack = kInf;
  r.max_relative_slack = 0.0;
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    if (m.boundary()[tri[0]] || m.boundary()[tri[1]] || m.boundary()[tri[2]]) continue;
    const int ti = static_cast<int>(t);
    const double vb = (v.values()[tri[0]] + v.values()[tri[1]] + v.values()[tri[2]]) / 3.0;
    const double wb = (w.values()[tri[0]] + w.values()[tri[1]] + w.values()[tri[2]]) / 3.0;
    const Vec2 gv = v.gradient(ti), gw = w.gradient(ti);
    const double rho = wb / vb;
    const double nv = gv.norm(), nw = gw.norm();
    const double rhs = std::pow(nw, p);
    double lhs = 0.0;
    if (nv > 0.0) {
      const Vec2 g_quot = p * std::pow(rho, p - 1.0) * gw - (p - 1.0) * std::pow(rho, p) * gv;
      lhs = std::pow(nv, p - 2.0) * gv.dot(g_quot);
    }
    const double slack = rhs - lhs;
    const double size = rhs + std::pow(rho * nv, p);
    const double rel = size > 0.0 ? slack / size : 0.0;
    ++r.triangles;
    r.min_slack = std::min(r.min_slack, slack);
    r.min_relative_slack = std::min(r.min_relative_slack, rel);
    r.max_relative_slack = std::max(r.max_relative_slack, std::abs(rel));
    r.integral_slack += m.area(ti) * slack;
  }
  if (r.triangles == 0) throw Error(ErrorKind::InvalidConfig, "no interior triangles");
  r.nonnegative = r.min_relative_slack >= -tol;
  r.equality = r.max_relative_slack <= 1e-10;
  return r;
}

ReflectionReport reflection_comparison_experiment(const ScalarField& u, double t, double tol) {
  ReflectionReport r;
  r.level = t;
  r.max_u = u.max();
  r.tolerance = tol;
  const LevelSet ls = level_set(u, t);
  r.defect = ls.defect;
  r.level_body = ls.hull;
  const ConvexPolygon& k = ls.hull;
  const ShadowSection s = shadow_section_for_min_breadth(k);
  const Direction2 wp = s.cut.omega;
  r.width_direction = s.width_direction.vector();
  r.cut_normal = wp.vector();
  r.lambda = s.cut.lambda;
  r.breadth_perp = breadth(k, wp);
  r.mu = support(k, wp) - 0.25 * r.breadth_perp;
  const Cut2 fold(r.mu, wp);
  r.fold_verified = is_foldable(k, fold);
  if (!r.fold_verified) throw Error(ErrorKind::FoldFailed, "the quarter-breadth cap of the level set is not foldable");
  r.cap_body = cap(k, fold);

  const Mesh& m = u.mesh();
  r.min_difference = kInf;
  auto probe = [&](const Vec2& x, double ux) {
    if (ux < t || x.dot(wp.vector()) < r.mu) return;
    const auto ut = u.value(reflect(x, fold));
    if (!ut) return;
    ++r.points_checked;
    const double d = *ut - ux;
    if (d < r.min_difference) {
      r.min_difference = d;
      r.worst_point = x;
    }
  };
  for (std::size_t i = 0; i < m.n_points(); ++i) probe(m.points()[i], u.values()[i]);
  for (std::size_t ti = 0; ti < m.n_triangles(); ++ti) {
    const auto& tri = m.triangles()[ti];
    const Vec2 c = (m.points()[tri[0]] + m.points()[tri[1]] + m.points()[tri[2]]) / 3.0;
    probe(c, (u.values()[tri[0]] + u.values()[tri[1]] + u.values()[tri[2]]) / 3.0);
  }
  r.comparison_holds = r.points_checked > 0 && r.min_difference >= -tol;
  return r;
}

}  // namespace convfold
