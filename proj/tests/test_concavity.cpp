#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "convfold/concavity.hpp"
#include "test_support.hpp"

using namespace convfold;
using convfold::testing::unit_square;

namespace {

const Solution& torsion_solution(const std::string& domain, double p) {
  static std::map<std::pair<std::string, double>, Solution> cache;
  const auto key = std::make_pair(domain, p);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, solve(builtin_domain(domain), Reaction::torsion(p), 0.02)).first;
  return it->second;
}

ScalarField sample(const ConvexPolygon& domain, double h, const std::function<double(const Vec2&)>& fn) {
  const auto m = mesh_polygon(domain, h);
  Eigen::VectorXd v(m->n_points());
  for (std::size_t i = 0; i < m->n_points(); ++i) v[i] = fn(m->points()[i]);
  return ScalarField(m, v);
}

ScalarField two_bumps() {
  return sample(builtin_domain("rectangle3"), 0.03, [](const Vec2& x) {
    const double a = std::exp(-((x - Vec2(0.8, 0.5)).squaredNorm()) / 0.05);
    const double b = std::exp(-((x - Vec2(2.2, 0.5)).squaredNorm()) / 0.05);
    return std::max(a, b);
  });
}

}  // namespace

TEST(PhiTransform, TorsionClosedForm) {
  const auto phi = phi_transform(Reaction::torsion(2));
  EXPECT_TRUE(phi.closed_form());
  for (double t : {0.01, 0.25, 1.0, 4.0}) EXPECT_NEAR(phi(t), 2 * (std::sqrt(t) - 1), 1e-14);
  const auto phi3 = phi_transform(Reaction::torsion(3));
  EXPECT_NEAR(phi3(8.0), 1.5 * (4.0 - 1.0), 1e-13);
}

TEST(PhiTransform, PowerClosedForms) {
  const auto a = phi_transform(Reaction::power(2, 1, 1)), b = phi_transform(Reaction::torsion(2));
  for (double t : {0.1, 0.5, 2.0}) EXPECT_NEAR(a(t), b(t), 1e-14);
  const auto c = phi_transform(Reaction::power(3, 1, 2));
  for (double t : {0.05, 0.5, 3.0}) {
    EXPECT_NEAR(c(t), std::cbrt(2.0) * 3 * (std::cbrt(t) - 1), 1e-13);
  }
}

TEST(PhiTransform, TabulatedQuadratureMatchesClosedForm) {
  // f = 1 everywhere makes the table a torsion reaction.
  const auto tab = phi_transform(Reaction::tabulated(2.5, {0, 10}, {1, 1}));
  const auto ref = phi_transform(Reaction::torsion(2.5));
  EXPECT_FALSE(tab.closed_form());
  for (double t : {1e-4, 0.01, 0.3, 1.0, 2.0}) EXPECT_NEAR(tab(t), ref(t), 1e-10);
}

TEST(PhiTransform, RoundTrip) {
  const std::vector<Reaction> reactions{Reaction::torsion(1.5), Reaction::torsion(3), Reaction::power(2, 2, 1.5),
                                        Reaction::power(3, 1, 2), Reaction::tabulated(2, {0, 0.5, 1}, {1, 2, 1.5})};
  for (const auto& r : reactions) {
    const auto phi = phi_transform(r);
    for (int i = 1; i <= 50; ++i) {
      const double t = 0.3 * i / 50;  // (0, max u] for the corpus
      EXPECT_NEAR(phi.inverse(phi(t)), t, 1e-10 * std::max(t, 1e-3)) << r.name() << " t=" << t;
    }
    for (int i = 1; i < 50; ++i) {
      EXPECT_LT(phi(0.3 * (i - 1) / 50 + 1e-6), phi(0.3 * i / 50)) << r.name();
    }
  }
}

TEST(Transforms, LogAndPower) {
  EXPECT_NEAR(log_transform()(std::exp(1.5)), 1.5, 1e-15);
  EXPECT_NEAR(log_transform().inverse(-2.0), std::exp(-2.0), 1e-15);
  const auto pc = power_concavity_transform(3);
  EXPECT_NEAR(pc(8.0), 4.0, 1e-13);
  EXPECT_NEAR(pc.inverse(4.0), 8.0, 1e-12);
  EXPECT_THROW(power_concavity_transform(1.0), Error);
}

TEST(Hypotheses, Torsion) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto rep = check_hypotheses(Reaction::torsion(p));
    EXPECT_EQ(rep.n_points, 10000);
    for (const auto* c : rep.all()) EXPECT_TRUE(c->holds) << c->name << " p=" << p;
  }
}

TEST(Hypotheses, PowerBelowP) {
  const auto rep = check_hypotheses(Reaction::power(3, 2, 2));
  EXPECT_TRUE(rep.ratio_nonincreasing.holds);
  EXPECT_TRUE(rep.root_concave.holds);
  EXPECT_TRUE(rep.quotient_convex.holds);
  EXPECT_TRUE(rep.exp_ratio_convex.holds);
}

TEST(Hypotheses, PowerAboveP) {
  const auto rep = check_hypotheses(Reaction::power(2, 1, 3));
  EXPECT_FALSE(rep.ratio_nonincreasing.holds);
  EXPECT_GT(rep.ratio_nonincreasing.worst_violation, 0.0);
  EXPECT_FALSE(rep.root_concave.holds);
}

TEST(Hypotheses, TableWithBump) {
  // f rises faster than t^(p-1) on [0.5, 0.6].
  const auto rep = check_hypotheses(Reaction::tabulated(2, {0, 0.5, 0.6, 10}, {1, 1, 5, 5}));
  EXPECT_FALSE(rep.ratio_nonincreasing.holds);
  EXPECT_GT(rep.ratio_nonincreasing.worst_at, 0.45);
  EXPECT_LT(rep.ratio_nonincreasing.worst_at, 0.65);
}

TEST(QuasiConcave, RadialField) {
  const auto u = sample(builtin_domain("disk"), 0.03, [](const Vec2& x) { return 1 - x.squaredNorm(); });
  const auto r = check_quasiconcave(u, 20);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.worst_defect, 1e-3);
}

TEST(QuasiConcave, TwoBumpsFail) {
  const auto r = check_quasiconcave(two_bumps(), 20);
  EXPECT_FALSE(r.passed);
  EXPECT_GE(r.max_components, 2);
  EXPECT_GT(r.worst_level, 0.1);
}

TEST(QuasiConcave, SolvedSquare) {
  const auto r = check_quasiconcave(torsion_solution("square", 2).u, 20);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.worst_defect, 1e-3);
}

TEST(CriticalPoints, DiskCenter) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto& u = torsion_solution("disk", p).u;
    const auto r = count_critical_points(u);
    ASSERT_EQ(r.count, 1) << "p=" << p;
    EXPECT_LT(r.centers[0].norm(), 2 * u.mesh().h());
  }
}

TEST(CriticalPoints, SquareCenter) {
  const auto& u = torsion_solution("square", 2).u;
  const auto r = count_critical_points(u);
  ASSERT_EQ(r.count, 1);
  EXPECT_LT((r.centers[0] - Vec2(0.5, 0.5)).norm(), 2 * u.mesh().h());
  EXPECT_NEAR(r.cluster_distance, 3 * u.mesh().h(), 1e-15);
  EXPECT_GT(r.argmax_epsilon, 0.0);
}

TEST(CriticalPoints, TwoBumps) {
  const auto r = count_critical_points(two_bumps());
  EXPECT_EQ(r.count, 2);
}

TEST(CriticalPoints, InvariantUnderIncreasingTransforms) {
  for (const std::string d : {"square", "pentagon", "rectangle3"}) {
    for (double p : {1.5, 3.0}) {
      const auto& u = torsion_solution(d, p).u;
      const auto base = count_critical_points(u);
      for (const auto& tr : {phi_transform(Reaction::torsion(p)), log_transform(), power_concavity_transform(p)}) {
        const auto v = apply_transform(u, tr);
        const auto r = count_critical_points(v);
        ASSERT_EQ(r.count, base.count) << d << " " << tr.formula();
        for (int k = 0; k < r.count; ++k) EXPECT_LT((r.centers[k] - base.centers[k]).norm(), 1e-12);
      }
    }
  }
  const auto bumps = two_bumps();
  EXPECT_EQ(count_critical_points(apply_transform(bumps, log_transform())).count, 2);
}

TEST(StrictConcavity, QuadraticCalibration) {
  ConcavityOptions opts;
  opts.n_segments = 2000;
  const auto r = check_strict_concavity([](const Vec2& x) { return -x.squaredNorm(); }, unit_square(), 0.01, opts);
  EXPECT_TRUE(r.strict);
  EXPECT_TRUE(r.concave);
  EXPECT_NEAR(r.min_normalized_gap, 0.25, 1e-12);
  EXPECT_EQ(r.n_segments, 2000);
}

TEST(StrictConcavity, AffineIsNotStrict) {
  const auto v = sample(unit_square(), 0.05, [](const Vec2& x) { return 3 * x.x() - x.y() + 2; });
  ConcavityOptions opts;
  opts.n_segments = 2000;
  const auto r = check_strict_concavity(v, opts);
  EXPECT_TRUE(r.concave);
  EXPECT_FALSE(r.strict);
  EXPECT_NEAR(r.min_gap, 0.0, 1e-12);
}

TEST(StrictConcavity, ConvexFieldFails) {
  const auto v = sample(unit_square(), 0.05, [](const Vec2& x) { return x.squaredNorm(); });
  const auto r = check_strict_concavity(v);
  EXPECT_FALSE(r.concave);
  EXPECT_LT(r.min_gap, 0.0);
}

TEST(StrictConcavity, DiskRootOfTorsion) {
  const auto& u = torsion_solution("disk", 2).u;
  const auto r = check_strict_concavity(apply_transform(u, power_concavity_transform(2)));
  EXPECT_EQ(r.n_segments, 10000);
  EXPECT_TRUE(r.strict);
  EXPECT_GT(r.min_gap, 0.0);
}

TEST(StrictConcavity, PhiAndLogOnSolutions) {
  for (const std::string d : {"square", "rectangle3"}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const auto& u = torsion_solution(d, p).u;
      EXPECT_TRUE(check_strict_concavity(apply_transform(u, phi_transform(Reaction::torsion(p)))).strict)
          << d << " p=" << p;
      EXPECT_TRUE(check_strict_concavity(apply_transform(u, log_transform())).strict) << d << " p=" << p;
    }
  }
}

TEST(StrictConcavity, SeedDeterminesSegments) {
  const auto& u = torsion_solution("square", 2).u;
  ConcavityOptions opts;
  opts.n_segments = 500;
  const auto a = check_strict_concavity(u, opts), b = check_strict_concavity(u, opts);
  EXPECT_EQ(a.min_gap, b.min_gap);
  EXPECT_EQ(a.worst_x, b.worst_x);
  opts.seed = 8;
  EXPECT_NE(check_strict_concavity(u, opts).worst_x, a.worst_x);
}

TEST(Picone, ProportionalFieldsGiveEquality) {
  const auto& v = torsion_solution("pentagon", 2).u;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto self = picone_check(v, v, p);
    EXPECT_TRUE(self.equality);
    EXPECT_TRUE(self.nonnegative);
    const auto twice = picone_check(v, ScalarField(v.mesh_ptr(), 2 * v.values()), p);
    EXPECT_TRUE(twice.equality);
    EXPECT_NEAR(twice.integral_slack, 0.0, 1e-9);
  }
}

TEST(Picone, PerturbationGivesPositiveSlack) {
  const auto& v = torsion_solution("square", 2).u;
  std::mt19937_64 rng(4);
  Eigen::VectorXd noisy = v.values();
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy[i] *= 1 + 0.1 * (uniform01(rng) - 0.5);
  const ScalarField w(v.mesh_ptr(), noisy);
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& r : {picone_check(v, w, p), picone_check(w, v, p)}) {
      EXPECT_TRUE(r.nonnegative);
      EXPECT_FALSE(r.equality);
      EXPECT_GT(r.integral_slack, 0.0);
      EXPECT_GT(r.min_relative_slack, 0.0);
    }
  }
}

TEST(Picone, CorpusPairs) {
  for (const std::string d : {"square", "pentagon"}) {
    const auto& v = torsion_solution(d, 2).u;
    const auto w = solve_on_mesh(v.mesh_ptr(), Reaction::power(2, 1, 1.5)).u;
    const auto w3 = solve_on_mesh(v.mesh_ptr(), Reaction::torsion(3)).u;
    for (double p : {1.5, 2.0, 3.0}) {
      EXPECT_GE(picone_check(v, w, p).min_relative_slack, -1e-9);
      EXPECT_GE(picone_check(w, v, p).min_relative_slack, -1e-9);
      EXPECT_GE(picone_check(v, w3, p).min_relative_slack, -1e-9);
    }
  }
}

TEST(Picone, RejectsNonPositiveFields) {
  const auto& v = torsion_solution("square", 2).u;
  Eigen::VectorXd bad = v.values();
  bad[v.argmax_node()] = -1;
  try {
    picone_check(v, ScalarField(v.mesh_ptr(), bad), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveField);
  }
}

TEST(Reflection, SquareAndRectangle) {
  for (const std::string d : {"square", "rectangle3"}) {
    const auto& u = torsion_solution(d, 2).u;
    for (double frac : {0.5, 0.9}) {
      const auto r = reflection_comparison_experiment(u, frac * u.max());
      EXPECT_TRUE(r.fold_verified);
      EXPECT_GT(r.points_checked, 50);
      EXPECT_TRUE(r.comparison_holds) << d << " min difference " << r.min_difference;
      EXPECT_NEAR(r.mu, support(r.level_body, Direction2(r.cut_normal)) - r.breadth_perp / 4, 1e-12);
      EXPECT_NEAR(r.cut_normal.dot(r.width_direction), 0.0, 1e-12);
    }
  }
}

TEST(Reflection, RectangleCutIsAcrossTheLongSide) {
  const auto& u = torsion_solution("rectangle3", 2).u;
  const auto r = reflection_comparison_experiment(u, 0.5 * u.max());
  EXPECT_NEAR(std::abs(r.width_direction.y()), 1.0, 1e-6);
  EXPECT_NEAR(std::abs(r.cut_normal.x()), 1.0, 1e-6);
}

TEST(Reflection, DiskNearEquality) {
  const auto& u = torsion_solution("disk", 2).u;
  for (double frac : {0.3, 0.6, 0.9}) {
    const auto r = reflection_comparison_experiment(u, frac * u.max());
    EXPECT_TRUE(r.comparison_holds);
    EXPECT_LT(std::abs(r.min_difference), 1e-3 * u.max());
  }
}
