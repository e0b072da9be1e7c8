#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "convfold/plap_solver.hpp"
#include "test_support.hpp"

using namespace convfold;
using convfold::testing::unit_square;

namespace {

double torsion_center(double p) { return (p - 1) / p * std::pow(2.0, -1.0 / (p - 1)); }

// Series solution of -Delta u = 1 on the unit square.
double square_torsion(const Vec2& x) {
  const double pi = std::numbers::pi;
  double s = 0;
  for (int m = 1; m < 300; m += 2) {
    for (int n = 1; n < 300; n += 2) {
      s += 16.0 / (std::pow(pi, 4) * m * n * (m * m + n * n)) * std::sin(m * pi * x.x()) * std::sin(n * pi * x.y());
    }
  }
  return s;
}

// Distance from the center to the level t of the series solution along a unit direction.
double square_level_radius(double t, const Vec2& dir) {
  double lo = 0, hi = 0.49;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (square_torsion(Vec2(0.5, 0.5) + mid * dir) > t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Disk solutions are reused across tests.
const Solution& disk_solution(double p) {
  static std::map<double, Solution> cache;
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, solve(builtin_domain("disk"), Reaction::torsion(p), 0.02)).first;
  return it->second;
}

double profile_error(const Solution& s, const RadialProfile& oracle) {
  double err = 0;
  const auto& m = s.u.mesh();
  for (std::size_t i = 0; i < m.n_points(); ++i) {
    err = std::max(err, std::abs(s.u.values()[i] - oracle(m.points()[i].norm())));
  }
  return err / oracle.center();
}

}  // namespace

TEST(Reaction, ValidatesParameters) {
  EXPECT_NO_THROW(Reaction::power(2, 1, 1.5).validate());
  try {
    Reaction::power(2, 1, 2).validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidReaction);
  }
  EXPECT_THROW(Reaction::torsion(1.0).validate(), Error);
  EXPECT_THROW(Reaction::power(2, -1, 1.5).validate(), Error);
  EXPECT_THROW(Reaction::tabulated(2, {0, 1}, {1, 0}).validate(), Error);
  EXPECT_THROW(Reaction::tabulated(2, {0, 0}, {1, 1}).validate(), Error);
}

TEST(Reaction, PrimitiveMatchesQuadrature) {
  const Reaction r = Reaction::tabulated(2, {0, 0.5, 2}, {1, 3, 2});
  for (double t : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    double q = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) q += r.f((i + 0.5) * t / n) * t / n;
    EXPECT_NEAR(r.F(t), q, 1e-6);
  }
  const Reaction pw = Reaction::power(3, 2, 2);
  EXPECT_NEAR(pw.F(1.5), 2 * 1.5 * 1.5 / 2, 1e-14);
}

TEST(RadialOracle, TorsionClosedForms) {
  EXPECT_NEAR(radial_oracle(Reaction::torsion(2)).center(), 0.25, 1e-15);
  EXPECT_NEAR(radial_oracle(Reaction::torsion(3)).center(), 2.0 / 3.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(radial_oracle(Reaction::torsion(1.5)).center(), 1.0 / 12.0, 1e-15);
  const auto u = radial_oracle(Reaction::torsion(2));
  EXPECT_NEAR(u(0.5), 0.1875, 1e-15);
  EXPECT_NEAR(u(1.0), 0.0, 1e-15);
}

TEST(RadialOracle, PowerSatisfiesRadialEquation) {
  for (auto [p, q] : {std::pair{2.0, 1.5}, std::pair{3.0, 2.0}, std::pair{1.5, 1.25}}) {
    const Reaction r = Reaction::power(p, 1.0, q);
    const auto u = radial_oracle(r);
    EXPECT_NEAR(u(1.0), 0.0, 1e-8);
    // Flux form: -(r |u'|^(p-2) u')' = r f(u), by central differences.
    auto flux = [&](double s) {
      const double d = 1e-4;
      const double du = (u(s + d) - u(s - d)) / (2 * d);
      return s * std::pow(std::abs(du), p - 2) * du;
    };
    for (double s : {0.2, 0.4, 0.6, 0.8}) {
      const double d = 1e-3;
      const double lhs = -(flux(s + d) - flux(s - d)) / (2 * d);
      EXPECT_NEAR(lhs, s * r.f(u(s)), 2e-4 * (1 + s * r.f(u(s))));
    }
  }
}

TEST(RadialOracle, PowerWithLinearPrimitiveIsTorsion) {
  const auto a = radial_oracle(Reaction::power(3, 1, 1)), b = radial_oracle(Reaction::torsion(3));
  for (double r : {0.0, 0.3, 0.7, 0.95}) EXPECT_NEAR(a(r), b(r), 1e-7);
}

TEST(RadialOracle, TabulatedUnsupported) {
  try {
    radial_oracle(Reaction::tabulated(2, {0, 1}, {1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedReaction);
  }
}

TEST(Solve, DiskTorsionMatchesOracle) {
  for (double p : {1.5, 2.0, 3.0}) {
    const Solution& s = disk_solution(p);
    EXPECT_TRUE(s.diagnostics.converged);
    EXPECT_NEAR(s.u.max() / torsion_center(p), 1.0, 0.01) << "p=" << p;
    EXPECT_LT(profile_error(s, radial_oracle(Reaction::torsion(p))), 0.02) << "p=" << p;
  }
  EXPECT_NEAR(disk_solution(2.0).u.max(), 0.25, 0.005);
}

TEST(Solve, DiskPowerMatchesOracle) {
  const Reaction r = Reaction::power(3, 1, 2);
  const auto s = solve(builtin_domain("disk"), r, 0.03);
  EXPECT_LT(profile_error(s, radial_oracle(r)), 0.02);
}

TEST(Solve, SquareTorsionMatchesSeries) {
  const double oracle = square_torsion(Vec2(0.5, 0.5));
  EXPECT_NEAR(oracle, 0.0737, 5e-5);
  const auto s = solve(unit_square(), Reaction::torsion(2), 0.01);
  EXPECT_NEAR(s.u.max(), oracle, 0.001);
}

TEST(Solve, StationarityReported) {
  const Solution& s = disk_solution(3.0);
  const auto& d = s.diagnostics;
  EXPECT_LT(d.rel_decrease, 1e-10);
  EXPECT_LT(d.residual, 1e-6);
  EXPECT_GE(d.stages.size(), 3u);
  EXPECT_GE(d.eps_limit_change, 0.0);
  EXPECT_LT(d.eps_limit_change, 1e-4 * s.u.max());
}

TEST(Solve, EnergyNonincreasingWithinStages) {
  for (double p : {1.5, 3.0}) {
    for (const auto& st : disk_solution(p).diagnostics.stages) {
      for (std::size_t i = 1; i < st.energy_history.size(); ++i) {
        EXPECT_LE(st.energy_history[i], st.energy_history[i - 1]);
      }
    }
  }
}

TEST(Solve, PositiveInsideZeroOnBoundary) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto& u = disk_solution(p).u;
    const auto& m = u.mesh();
    for (std::size_t i = 0; i < m.n_points(); ++i) {
      if (m.boundary()[i]) {
        EXPECT_EQ(u.values()[i], 0.0);
      } else {
        EXPECT_GT(u.values()[i], 0.0);
      }
    }
  }
}

TEST(Solve, SolutionMinimizesDiscreteEnergy) {
  const Solution& s = disk_solution(2.0);
  const double e = discrete_energy(s.u, s.reaction);
  Eigen::VectorXd bump = s.u.values();
  const auto& m = s.u.mesh();
  for (std::size_t i = 0; i < m.n_points(); ++i) {
    if (!m.boundary()[i]) bump[i] *= 1.0 + 0.01 * std::cos(3 * m.points()[i].x());
  }
  EXPECT_GT(discrete_energy(ScalarField(s.u.mesh_ptr(), bump), s.reaction), e);
  EXPECT_GT(discrete_energy(ScalarField(s.u.mesh_ptr(), 1.01 * s.u.values()), s.reaction), e);
}

TEST(Solve, NestedDomainComparison) {
  for (double p : {1.5, 3.0}) {
    const auto small = solve(unit_square(), Reaction::torsion(p), 0.025);
    const auto big = solve(builtin_domain("rectangle3"), Reaction::torsion(p), 0.025);
    const double tol = 1e-3 * big.u.max();
    const auto& m = small.u.mesh();
    for (std::size_t i = 0; i < m.n_points(); ++i) {
      const auto outer = big.u.value(m.points()[i]);
      ASSERT_TRUE(outer.has_value());
      EXPECT_LE(small.u.values()[i], *outer + tol);
    }
  }
}

TEST(Solve, ScalingLaw) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto a = solve(unit_square(), Reaction::torsion(p), 0.02);
    const auto b = solve(unit_square().scaled(2.0), Reaction::torsion(p), 0.04);
    const double factor = std::pow(2.0, p / (p - 1));
    EXPECT_NEAR(b.u.max() / (factor * a.u.max()), 1.0, 0.01) << "p=" << p;
    for (const Vec2& x : {Vec2(0.5, 0.5), Vec2(0.2, 0.7), Vec2(0.9, 0.1)}) {
      EXPECT_NEAR(*b.u.value(2.0 * x), factor * *a.u.value(x), 0.01 * factor * a.u.max());
    }
  }
}

TEST(Solve, RefinementChangesMaxLittle) {
  for (double p : {1.5, 3.0}) {
    const auto coarse = solve(unit_square(), Reaction::torsion(p), 0.04);
    const auto fine = solve(unit_square(), Reaction::torsion(p), 0.02);
    EXPECT_NEAR(coarse.u.max() / fine.u.max(), 1.0, 0.02) << "p=" << p;
  }
}

TEST(Solve, ConstantTableMatchesTorsion) {
  const auto a = solve(unit_square(), Reaction::torsion(2), 0.04);
  const auto b = solve(unit_square(), Reaction::tabulated(2, {0, 1}, {1, 1}), 0.04);
  EXPECT_LT((a.u.values() - b.u.values()).lpNorm<Eigen::Infinity>(), 1e-6 * a.u.max());
}

TEST(Solve, Errors) {
  EXPECT_THROW(solve(unit_square(), Reaction::torsion(2), 0.2), Error);
  try {
    solve(unit_square(), Reaction::power(2, 1, 3), 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidReaction);
  }
  SolveOptions opts;
  opts.max_iterations = 1;
  try {
    solve(unit_square(), Reaction::torsion(3), 0.05, opts);
    FAIL();
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonConvergence);
    EXPECT_GT(e.last_iterate().u.max(), 0.0);
    EXPECT_FALSE(e.last_iterate().diagnostics.converged);
  }
}

TEST(LevelSet, DiskCircle) {
  const auto ls = level_set(disk_solution(2.0).u, 0.1875);
  ASSERT_EQ(ls.contours.size(), 1u);
  EXPECT_TRUE(ls.closed[0]);
  for (const auto& v : ls.contours[0]) EXPECT_NEAR(v.norm(), 0.5, 0.005);
  EXPECT_NEAR(ls.area, std::numbers::pi * 0.25, 0.01);
  EXPECT_TRUE(ls.convex);
  EXPECT_LT(ls.defect, 1e-3);
}

TEST(LevelSet, AreaOfAffineSuperLevelSet) {
  const auto m = mesh_polygon(unit_square(), 0.05);
  Eigen::VectorXd v(m->n_points());
  for (std::size_t i = 0; i < m->n_points(); ++i) v[i] = m->points()[i].x() + m->points()[i].y();
  const auto ls = level_set(ScalarField(m, v), 1.5);
  EXPECT_NEAR(ls.area, 0.125, 1e-12);
  EXPECT_NEAR(ls.defect, 0.0, 1e-12);
}

TEST(LevelSet, SaddleHasDefect) {
  const auto m = mesh_polygon(unit_square().translated(Vec2(-0.5, -0.5)), 0.02);
  Eigen::VectorXd v(m->n_points());
  for (std::size_t i = 0; i < m->n_points(); ++i) {
    const Vec2& x = m->points()[i];
    v[i] = 1 + x.x() * x.x() - x.y() * x.y();
  }
  const auto ls = level_set(ScalarField(m, v), 1.05);
  EXPECT_GT(ls.defect, 1e-3);
  EXPECT_FALSE(ls.convex);
  EXPECT_EQ(ls.contours.size(), 2u);
}

TEST(LevelSet, EmptyLevel) {
  const auto& u = disk_solution(2.0).u;
  try {
    level_set(u, u.max());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyLevel);
  }
}

TEST(ArgmaxSet, DiskIsRound) {
  const auto a = argmax_set(disk_solution(2.0).u, 0.01);
  EXPECT_GE(a.alpha_ratio, 0.9);
  EXPECT_TRUE(a.alpha_beta_condition == (a.alpha_ratio * a.alpha_ratio +
                                             std::pow(0.75 * a.beta_ratio, 2) < 1));
  // (1 - r^2)/4 = 0.25 - 0.01 at r = 0.2.
  EXPECT_NEAR(a.diameter, 0.4, 0.02);
}

TEST(ArgmaxSet, SquareAndWholeDomain) {
  const auto s = solve(unit_square(), Reaction::torsion(2), 0.02);
  // The level set is nearly round; its diameter is attained along a diagonal.
  const double top = square_torsion(Vec2(0.5, 0.5));
  const double oracle = 2 * square_level_radius(top - 0.005, Vec2(1, 1).normalized());
  EXPECT_GT(oracle, 0.28);
  EXPECT_NEAR(argmax_set(s.u, 0.005).diameter, oracle, 0.02 * oracle);
  const auto all = argmax_set(s.u, 2 * s.u.max());
  EXPECT_TRUE(all.whole_domain);
  EXPECT_NEAR(all.diameter, std::sqrt(2.0), 1e-12);
  EXPECT_THROW(argmax_set(s.u, 0.0), Error);
}

TEST(ArgmaxSet, ShrinksWithEpsilon) {
  const auto& u = disk_solution(3.0).u;
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.1, 0.03, 0.01, 0.003}) {
    const double d = argmax_set(u, eps * u.max()).diameter;
    EXPECT_LT(d, prev);
    prev = d;
  }
}
