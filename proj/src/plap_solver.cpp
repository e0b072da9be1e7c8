#include "convfold/plap_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace convfold {

Reaction Reaction::torsion(double p) {
  Reaction r;
  r.kind = Kind::Torsion;
  r.p = p;
  return r;
}

Reaction Reaction::power(double p, double c, double q) {
  Reaction r;
  r.kind = Kind::Power;
  r.p = p;
  r.c = c;
  r.q = q;
  return r;
}

Reaction Reaction::tabulated(double p, std::vector<double> t, std::vector<double> f) {
  Reaction r;
  r.kind = Kind::Tabulated;
  r.p = p;
  r.table_t = std::move(t);
  r.table_f = std::move(f);
  return r;
}

namespace {

// Piecewise-linear table value, constant beyond the ends.
double table_value(const std::vector<double>& t, const std::vector<double>& f, double x) {
  if (x <= t.front()) return f.front();
  if (x >= t.back()) return f.back();
  const auto it = std::upper_bound(t.begin(), t.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  const double s = (x - t[j - 1]) / (t[j] - t[j - 1]);
  return f[j - 1] + s * (f[j] - f[j - 1]);
}

double table_primitive(const std::vector<double>& t, const std::vector<double>& f, double x) {
  // Integral from 0 with f extended constantly below t.front().
  const double t0 = std::max(0.0, t.front());
  if (x <= t0) return f.front() * x;
  double acc = f.front() * t0;
  double prev_t = t0, prev_f = table_value(t, f, t0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] <= t0) continue;
    const double hi = std::min(x, t[j]);
    const double fh = table_value(t, f, hi);
    acc += 0.5 * (prev_f + fh) * (hi - prev_t);
    prev_t = hi;
    prev_f = fh;
    if (x <= t[j]) return acc;
  }
  return acc + f.back() * (x - prev_t);
}

}  // namespace

double Reaction::f(double t) const {
  switch (kind) {
    case Kind::Torsion: return 1.0;
    case Kind::Power:
      if (t <= 0.0) return q == 1.0 ? c : 0.0;
      return c * std::pow(t, q - 1.0);
    case Kind::Tabulated: return table_value(table_t, table_f, t);
  }
  return 0.0;
}

double Reaction::F(double t) const {
  switch (kind) {
    case Kind::Torsion: return t;
    case Kind::Power:
      if (t <= 0.0) return q == 1.0 ? c * t : 0.0;
      return c * std::pow(t, q) / q;
    case Kind::Tabulated: return table_primitive(table_t, table_f, t);
  }
  return 0.0;
}

void Reaction::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidReaction, "p must be greater than 1");
  if (kind == Kind::Power) {
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidReaction, "power reaction needs c > 0");
    if (!(q >= 1.0) || !(q < p)) throw Error(ErrorKind::InvalidReaction, "power reaction needs 1 <= q < p");
  }
  if (kind == Kind::Tabulated) {
    if (table_t.size() < 2 || table_t.size() != table_f.size()) {
      throw Error(ErrorKind::InvalidReaction, "tabulated reaction needs at least two (t, f) pairs");
    }
    for (std::size_t i = 0; i < table_t.size(); ++i) {
      if (i > 0 && !(table_t[i] > table_t[i - 1])) {
        throw Error(ErrorKind::InvalidReaction, "tabulated abscissae must increase");
      }
      if (!(table_f[i] > 0.0)) throw Error(ErrorKind::InvalidReaction, "tabulated f must be positive");
    }
    if (table_t.front() < 0.0) throw Error(ErrorKind::InvalidReaction, "tabulated abscissae must be nonnegative");
  }
}

std::string Reaction::name() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::Torsion: s << "torsion"; break;
    case Kind::Power: s << "power(c=" << c << ",q=" << q << ")"; break;
    case Kind::Tabulated: s << "tabulated(" << table_t.size() << ")"; break;
  }
  return s.str();
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

class Problem {
 public:
  Problem(const Mesh& mesh, const Reaction& r) : mesh_(mesh), r_(r) {
    index_.assign(mesh.n_points(), -1);
    for (std::size_t i = 0; i < mesh.n_points(); ++i) {
      if (!mesh.boundary()[i]) {
        index_[i] = static_cast<int>(interior_.size());
        interior_.push_back(static_cast<int>(i));
      }
    }
    weights_.resize(mesh.n_triangles());
  }

  int n() const { return static_cast<int>(interior_.size()); }
  void set_p(double p) { r_.p = p; }
  void set_eps(double eps) { eps_ = eps; }
  double eps() const { return eps_; }

  Eigen::VectorXd expand(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_.n_points()));
    for (int k = 0; k < n(); ++k) u[interior_[k]] = x[k];
    return u;
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& u) const {
    Eigen::VectorXd x(n());
    for (int k = 0; k < n(); ++k) x[k] = u[interior_[k]];
    return x;
  }

  double energy(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd u = expand(x);
    const double p = r_.p;
    double e = 0.0;
    for (std::size_t t = 0; t < mesh_.n_triangles(); ++t) {
      const double g2 = grad(u, t).squaredNorm();
      e += mesh_.area(static_cast<int>(t)) * std::pow(eps_ * eps_ + g2, 0.5 * p) / p;
    }
    const auto& m = mesh_.lumped_mass();
    for (int k = 0; k < n(); ++k) e -= m[interior_[k]] * r_.F(x[k]);
    return e;
  }

  /// J(y) - J(x), summed from per-triangle and per-node differences so that small changes
  /// are not lost against the size of J.
  double energy_difference(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const Eigen::VectorXd ux = expand(x), uy = expand(y);
    const double p = r_.p;
    double d = 0.0;
    for (std::size_t t = 0; t < mesh_.n_triangles(); ++t) {
      const Vec2 gx = grad(ux, t), gy = grad(uy, t);
      const double a = eps_ * eps_ + gx.squaredNorm();
      const double delta = (gy - gx).dot(gy + gx);
      d += mesh_.area(static_cast<int>(t)) * pow_difference(a, delta, 0.5 * p) / p;
    }
    const auto& m = mesh_.lumped_mass();
    for (int k = 0; k < n(); ++k) d -= m[interior_[k]] * primitive_difference(x[k], y[k]);
    return d;
  }

  /// Energy gradient; also refreshes the per-triangle diffusion weights.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) {
    const Eigen::VectorXd u = expand(x);
    Eigen::VectorXd gfull = Eigen::VectorXd::Zero(u.size());
    const double p = r_.p;
    for (std::size_t t = 0; t < mesh_.n_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const Vec2 g = grad(u, t);
      const double w = std::pow(eps_ * eps_ + g.squaredNorm(), 0.5 * (p - 2.0));
      weights_[t] = w;
      const auto& tri = mesh_.triangles()[t];
      const Eigen::Vector3d local = mesh_.area(ti) * w * (mesh_.hat_gradients(ti).transpose() * g);
      for (int i = 0; i < 3; ++i) gfull[tri[i]] += local[i];
    }
    const auto& m = mesh_.lumped_mass();
    Eigen::VectorXd out(n());
    for (int k = 0; k < n(); ++k) out[k] = gfull[interior_[k]] - m[interior_[k]] * r_.f(x[k]);
    return out;
  }

  /// Weighted stiffness matrix on interior nodes, from the last gradient() call.
  SpMat stiffness(bool unit_weights = false) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh_.n_triangles() * 9);
    for (std::size_t t = 0; t < mesh_.n_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const auto& tri = mesh_.triangles()[t];
      const auto& G = mesh_.hat_gradients(ti);
      const double w = (unit_weights ? 1.0 : weights_[t]) * mesh_.area(ti);
      for (int i = 0; i < 3; ++i) {
        const int a = index_[tri[i]];
        if (a < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int b = index_[tri[j]];
          if (b < 0) continue;
          trips.emplace_back(a, b, w * G.col(i).dot(G.col(j)));
        }
      }
    }
    SpMat k(n(), n());
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
  }

  /// Relative residual: L2 norm of the nodal residual density over that of f(u).
  double relative_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
    const auto& m = mesh_.lumped_mass();
    double num = 0.0, den = 0.0;
    for (int k = 0; k < n(); ++k) {
      const double mi = m[interior_[k]];
      num += g[k] * g[k] / mi;
      const double fi = r_.f(x[k]);
      den += mi * fi * fi;
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
  }

  Eigen::VectorXd lumped_mass_times(const std::function<double(double)>& fn, const Eigen::VectorXd& x) const {
    const auto& m = mesh_.lumped_mass();
    Eigen::VectorXd out(n());
    for (int k = 0; k < n(); ++k) out[k] = m[interior_[k]] * fn(x[k]);
    return out;
  }

  double max_gradient(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd u = expand(x);
    double g = 0.0;
    for (std::size_t t = 0; t < mesh_.n_triangles(); ++t) g = std::max(g, grad(u, t).norm());
    return g;
  }

 private:
  // (a + delta)^e - a^e without cancellation.
  static double pow_difference(double a, double delta, double e) {
    if (delta == 0.0) return 0.0;
    if (a <= 0.0) return std::pow(std::max(delta, 0.0), e);
    const double r = delta / a;
    if (r <= -1.0) return -std::pow(a, e);
    return std::pow(a, e) * std::expm1(e * std::log1p(r));
  }

  double primitive_difference(double x, double y) const {
    switch (r_.kind) {
      case Reaction::Kind::Torsion: return y - x;
      case Reaction::Kind::Power:
        if (x > 0.0 && y > 0.0) return r_.c / r_.q * std::pow(x, r_.q) * std::expm1(r_.q * std::log1p((y - x) / x));
        return r_.F(y) - r_.F(x);
      case Reaction::Kind::Tabulated: return r_.F(y) - r_.F(x);
    }
    return r_.F(y) - r_.F(x);
  }

  Vec2 grad(const Eigen::VectorXd& u, std::size_t t) const {
    const auto& tri = mesh_.triangles()[t];
    const auto& G = mesh_.hat_gradients(static_cast<int>(t));
    return G.col(0) * u[tri[0]] + G.col(1) * u[tri[1]] + G.col(2) * u[tri[2]];
  }

  const Mesh& mesh_;
  Reaction r_;
  double eps_ = 0.0;
  std::vector<int> index_;
  std::vector<int> interior_;
  std::vector<double> weights_;
};

// Minimizes J(s x) over s > 0 by golden section in log s.
double best_ray_scale(const Problem& pb, const Eigen::VectorXd& x) {
  auto j = [&](double ls) { return pb.energy(std::exp(ls) * x); };
  double a = std::log(1e-8), b = std::log(1e8);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = j(c), fd = j(d);
  for (int it = 0; it < 120; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = j(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = j(d);
    }
  }
  return std::exp(0.5 * (a + b));
}

// Preconditioned gradient descent: the direction solves the lagged-diffusivity system,
// the step length is Barzilai-Borwein with Armijo backtracking on the projected iterate.
SolveStage run_stage(Problem& pb, Eigen::VectorXd& x, double p, double eps, int max_it, double energy_tol,
                     double residual_tol, Eigen::SimplicialLDLT<SpMat>& ldlt, bool& analyzed) {
  pb.set_p(p);
  pb.set_eps(eps);
  SolveStage st;
  st.p = p;
  st.eps = eps;
  double e = pb.energy(x);
  st.energy_history.push_back(e);
  Eigen::VectorXd g = pb.gradient(x);
  Eigen::VectorXd prev_x, prev_g;
  double rel_decrease = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_it; ++it) {
    st.residual = pb.relative_residual(x, g);
    if (rel_decrease < energy_tol && st.residual < residual_tol) {
      st.converged = true;
      break;
    }
    const SpMat k = pb.stiffness();
    if (!analyzed) {
      ldlt.analyzePattern(k);
      analyzed = true;
    }
    ldlt.factorize(k);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "preconditioner factorization failed");
    const Eigen::VectorXd d = -ldlt.solve(g);
    double step = 1.0;
    if (prev_x.size() == x.size()) {
      const Eigen::VectorXd dx = x - prev_x, dg = g - prev_g;
      const double den = dx.dot(dg);
      const double num = dx.dot(k * dx);
      if (den > 0.0 && num > 0.0) step = std::clamp(num / den, 1e-3, 1e2);
    }
    const double slope = g.dot(d);
    Eigen::VectorXd trial;
    double e_trial = e;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = (x + step * d).cwiseMax(0.0);
      const double de = pb.energy_difference(x, trial);
      e_trial = e + de;
      const double model = std::min(slope, g.dot(trial - x));
      if (de <= 1e-4 * model && e_trial <= e) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++st.iterations;
    if (!accepted) {
      // No representable decrease left along the direction.
      rel_decrease = 0.0;
      continue;
    }
    rel_decrease = (e - e_trial) / std::max(std::abs(e_trial), 1e-300);
    prev_x = x;
    prev_g = g;
    x = trial;
    e = e_trial;
    st.energy_history.push_back(e);
    g = pb.gradient(x);
  }
  if (!st.converged) {
    st.residual = pb.relative_residual(x, g);
    st.converged = rel_decrease < energy_tol && st.residual < residual_tol;
  }
  st.energy = e;
  st.max_u = x.size() ? x.maxCoeff() : 0.0;
  return st;
}

}  // namespace

double discrete_energy(const ScalarField& u, const Reaction& reaction, double eps) {
  Problem pb(u.mesh(), reaction);
  pb.set_eps(eps);
  return pb.energy(pb.restrict(u.values()));
}

Solution solve_on_mesh(std::shared_ptr<const Mesh> mesh, const Reaction& reaction, const SolveOptions& options) {
  reaction.validate();
  const Mesh& m = *mesh;
  Problem pb(m, Reaction::torsion(2.0));
  if (pb.n() == 0) throw Error(ErrorKind::InvalidConfig, "mesh has no interior nodes");

  // p = 2 torsion by a linear solve.
  Eigen::SimplicialLDLT<SpMat> ldlt;
  const SpMat k0 = pb.stiffness(true);
  ldlt.compute(k0);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "stiffness factorization failed");
  Eigen::VectorXd x = ldlt.solve(pb.lumped_mass_times([](double) { return 1.0; }, Eigen::VectorXd::Zero(pb.n())));
  bool analyzed = false;

  Problem prob(m, reaction);
  SolveDiagnostics diag;
  const double p = reaction.p;
  const int p_steps = std::max(1, static_cast<int>(std::ceil(std::abs(p - 2.0) / options.max_p_step - 1e-12)));
  const double eps0_factor = options.eps_factors.empty() ? 0.0 : options.eps_factors.front();
  for (int s = 1; s <= p_steps; ++s) {
    const double ps = 2.0 + (p - 2.0) * s / p_steps;
    prob.set_p(ps);
    prob.set_eps(0.0);
    if (diag.gradient_scale == 0.0) {
      prob.set_eps(0.0);
      x *= best_ray_scale(prob, x);
      diag.gradient_scale = prob.max_gradient(x);
    } else {
      x *= best_ray_scale(prob, x);
    }
    if (s < p_steps) {
      diag.stages.push_back(run_stage(prob, x, ps, eps0_factor * diag.gradient_scale, options.max_iterations, 1e-6,
                                      1e-3, ldlt, analyzed));
    }
  }
  for (std::size_t i = 0; i < options.eps_factors.size(); ++i) {
    const bool last = i + 1 == options.eps_factors.size();
    const double etol = last ? options.energy_tol : std::max(options.energy_tol, 1e-8);
    const double rtol = last ? options.residual_tol : std::max(options.residual_tol, 1e-4);
    diag.stages.push_back(run_stage(prob, x, p, options.eps_factors[i] * diag.gradient_scale, options.max_iterations,
                                    etol, rtol, ldlt, analyzed));
  }
  const SolveStage& fin = diag.stages.back();
  diag.iterations = 0;
  for (const auto& st : diag.stages) diag.iterations += st.iterations;
  diag.energy = fin.energy;
  const auto& hist = fin.energy_history;
  diag.rel_decrease = hist.size() >= 2 ? (hist[hist.size() - 2] - hist.back()) / std::abs(hist.back()) : 0.0;
  diag.residual = fin.residual;
  diag.converged = fin.converged;
  if (diag.stages.size() >= 2) {
    diag.eps_limit_change = std::abs(fin.max_u - diag.stages[diag.stages.size() - 2].max_u);
  }

  Solution sol{ScalarField(mesh, prob.expand(x)), reaction, diag};
  if (!diag.converged) {
    std::ostringstream s;
    s << "iteration budget exhausted: residual " << diag.residual << ", last relative decrease " << diag.rel_decrease;
    throw NonConvergence(s.str(), std::move(sol));
  }
  return sol;
}

Solution solve(const ConvexPolygon& domain, const Reaction& reaction, double h, const SolveOptions& options) {
  if (domain.is_degenerate()) throw Error(ErrorKind::InvalidBody, "solver needs a polygon with interior");
  if (!(h > 0.0) || !(h < domain.diameter() / 10.0)) {
    throw Error(ErrorKind::InvalidConfig, "mesh size must satisfy 0 < h < diam/10");
  }
  reaction.validate();
  return solve_on_mesh(mesh_polygon(domain, h), reaction, options);
}

RadialProfile radial_oracle(const Reaction& reaction) {
  reaction.validate();
  const double p = reaction.p;
  if (reaction.kind == Reaction::Kind::Tabulated) {
    throw Error(ErrorKind::UnsupportedReaction, "radial oracle covers torsion and power reactions only");
  }
  if (reaction.kind == Reaction::Kind::Torsion) {
    const double c = (p - 1.0) / p * std::pow(2.0, -1.0 / (p - 1.0));
    const double e = p / (p - 1.0);
    return RadialProfile(p, [c, e](double r) { return r >= 1.0 ? 0.0 : c * (1.0 - std::pow(std::abs(r), e)); });
  }
  // Shoot v from v(0) = 1 with w = r |v'|^(p-2) v', w' = -r f(v); then u(r) = a v(R r)
  // with R the first zero of v and a = R^(-p/(p-q)).
  const double q = reaction.q, cc = reaction.c;
  auto f = [&](double v) { return v > 0.0 ? cc * std::pow(v, q - 1.0) : 0.0; };
  const double e = p / (p - 1.0);
  const double r0 = 1e-6;
  double r = r0;
  double v = 1.0 - (p - 1.0) / p * std::pow(0.5 * f(1.0), 1.0 / (p - 1.0)) * std::pow(r0, e);
  double w = -0.5 * f(1.0) * r0 * r0;
  auto rhs = [&](double rr, double vv, double ww, double& dv, double& dw) {
    dv = -std::pow(std::max(-ww, 0.0) / rr, 1.0 / (p - 1.0));
    dw = -rr * f(vv);
  };
  // Step size from the torsion-like scale of the first zero.
  const double dr = 1e-4 * std::pow(2.0 * p / (p - 1.0), (p - 1.0) / p) / std::pow(cc, 1.0 / p);
  auto rk4 = [&](double rr, double vv, double ww, double hh, double& vo, double& wo) {
    double k1v, k1w, k2v, k2w, k3v, k3w, k4v, k4w;
    rhs(rr, vv, ww, k1v, k1w);
    rhs(rr + 0.5 * hh, vv + 0.5 * hh * k1v, ww + 0.5 * hh * k1w, k2v, k2w);
    rhs(rr + 0.5 * hh, vv + 0.5 * hh * k2v, ww + 0.5 * hh * k2w, k3v, k3w);
    rhs(rr + hh, vv + hh * k3v, ww + hh * k3w, k4v, k4w);
    vo = vv + hh / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    wo = ww + hh / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
  };
  std::vector<double> rs{0.0, r}, vs{1.0, v};
  double prev_r = r, prev_v = v, prev_w = w;
  for (int it = 0; it < 10000000 && v > 0.0; ++it) {
    // Geometric steps near the origin, where v' has a root-type singularity.
    const double hh = std::min(dr, 0.02 * r);
    prev_r = r;
    prev_v = v;
    prev_w = w;
    rk4(r, v, w, hh, v, w);
    r += hh;
    rs.push_back(r);
    vs.push_back(v);
  }
  if (v > 0.0) throw Error(ErrorKind::NonConvergence, "radial shooting did not reach a zero");
  // Zero inside the last step, by bisection on the step length.
  double lo = 0.0, hi = r - prev_r;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    double vm, wm;
    rk4(prev_r, prev_v, prev_w, mid, vm, wm);
    (vm > 0.0 ? lo : hi) = mid;
  }
  const double zero = prev_r + 0.5 * (lo + hi);
  rs.back() = zero;
  vs.back() = 0.0;
  const double a = std::pow(zero, -p / (p - q));
  return RadialProfile(p, [rs, vs, a, zero](double rr) {
    const double s = std::abs(rr) * zero;
    if (s >= zero) return 0.0;
    const auto it = std::upper_bound(rs.begin(), rs.end(), s);
    const std::size_t j = std::max<std::size_t>(1, static_cast<std::size_t>(it - rs.begin()));
    const double t = (s - rs[j - 1]) / (rs[j] - rs[j - 1]);
    return a * (vs[j - 1] + t * (vs[j] - vs[j - 1]));
  });
}

LevelSet level_set(const ScalarField& u, double t, double defect_tol) {
  const double top = u.max();
  if (!(t < top)) throw Error(ErrorKind::EmptyLevel, "level is at or above the maximum");
  const Mesh& m = u.mesh();
  const auto& val = u.values();
  const auto& pts = m.points();
  LevelSet ls;
  ls.level = t;
  std::vector<Vec2> cloud;
  // Oriented contour pieces keyed by the mesh edge they start on.
  using Key = std::pair<int, int>;
  auto key = [](int a, int b) { return a < b ? Key{a, b} : Key{b, a}; };
  struct Piece {
    Vec2 a, b;
    Key end;
    bool used = false;
  };
  std::vector<Piece> pieces;
  std::map<Key, int> start_on;
  std::map<Key, int> end_count;
  for (std::size_t ti = 0; ti < m.n_triangles(); ++ti) {
    const auto& tri = m.triangles()[ti];
    std::vector<Vec2> poly;
    int exit_edge = -1, entry_edge = -1;
    Vec2 exit_pt, entry_pt;
    for (int i = 0; i < 3; ++i) {
      const int a = tri[i], b = tri[(i + 1) % 3];
      const bool ina = val[a] >= t, inb = val[b] >= t;
      if (ina) poly.push_back(pts[a]);
      if (ina != inb) {
        const double s = (t - val[a]) / (val[b] - val[a]);
        const Vec2 x = pts[a] + s * (pts[b] - pts[a]);
        poly.push_back(x);
        if (ina) {
          exit_edge = i;
          exit_pt = x;
        } else {
          entry_edge = i;
          entry_pt = x;
        }
      }
    }
    if (poly.size() >= 3) {
      double a2 = 0.0;
      for (std::size_t k = 0; k < poly.size(); ++k) a2 += cross(poly[k], poly[(k + 1) % poly.size()]);
      ls.area += 0.5 * a2;
    }
    cloud.insert(cloud.end(), poly.begin(), poly.end());
    if (exit_edge >= 0 && entry_edge >= 0) {
      const Key ks = key(tri[exit_edge], tri[(exit_edge + 1) % 3]);
      const Key ke = key(tri[entry_edge], tri[(entry_edge + 1) % 3]);
      start_on[ks] = static_cast<int>(pieces.size());
      end_count[ke] += 1;
      pieces.push_back({exit_pt, entry_pt, ke});
    }
  }
  ls.hull = ConvexPolygon::hull(cloud);
  ls.hull_area = ls.hull.area();
  ls.defect = ls.hull_area > 0.0 ? std::max(0.0, 1.0 - ls.area / ls.hull_area) : 0.0;
  ls.convex = ls.defect < defect_tol;

  // Chains start on pieces whose start edge is nobody's end (open at the mesh boundary).
  auto trace = [&](int first) {
    std::vector<Vec2> chain{pieces[first].a};
    int cur = first;
    bool closed = false;
    while (true) {
      pieces[cur].used = true;
      chain.push_back(pieces[cur].b);
      const auto it = start_on.find(pieces[cur].end);
      if (it == start_on.end()) break;
      if (it->second == first) {
        closed = true;
        chain.pop_back();
        break;
      }
      if (pieces[it->second].used) break;
      cur = it->second;
    }
    ls.contours.push_back(std::move(chain));
    ls.closed.push_back(closed);
  };
  for (const auto& [k, idx] : start_on) {
    if (!pieces[idx].used && end_count.find(k) == end_count.end()) trace(idx);
  }
  for (const auto& [k, idx] : start_on) {
    if (!pieces[idx].used) trace(idx);
  }
  return ls;
}

ArgmaxSet argmax_set(const ScalarField& u, double epsilon, double defect_tol) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "epsilon must be positive");
  ArgmaxSet a;
  a.epsilon = epsilon;
  const double top = u.max();
  if (epsilon > top) {
    a.whole_domain = true;
    a.level.level = top - epsilon;
    a.level.hull = u.mesh().domain();
    a.level.area = a.level.hull_area = a.level.hull.area();
    a.level.convex = true;
  } else {
    a.level = level_set(u, top - epsilon, defect_tol);
  }
  const ConvexPolygon& k = a.level.hull;
  a.diameter = k.diameter();
  if (k.size() >= 2) {
    const WidthResult w = width(k);
    a.width = w.width;
    a.width_direction = w.direction.vector();
    a.breadth_perp = breadth(k, perp(w.direction));
  }
  if (a.diameter > 0.0) {
    a.alpha_ratio = a.width / a.diameter;
    a.beta_ratio = a.breadth_perp / a.diameter;
    a.alpha_beta_condition = a.alpha_ratio * a.alpha_ratio + std::pow(0.75 * a.beta_ratio, 2) < 1.0;
  }
  return a;
}

}  // namespace convfold
