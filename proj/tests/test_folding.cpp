#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "convfold/folding.hpp"
#include "test_support.hpp"

using namespace convfold;
using convfold::testing::parallelogram;
using convfold::testing::random_polygon;
using convfold::testing::unit_square;

namespace {

const Direction2 kX(Vec2(1, 0));

// Oracle for lambda_min by a plain downward scan in lambda, independent of the bisection.
double scanned_lambda_min(const ConvexPolygon& k, const Direction2& w, int steps = 4000) {
  const double top = support(k, w), bottom = -support(k, -w);
  double best = top;
  for (int i = 0; i <= steps; ++i) {
    const double lam = top - (top - bottom) * i / steps;
    if (!is_foldable(k, Cut2(lam, w))) break;
    best = lam;
  }
  return best;
}

}  // namespace

TEST(Reflect, Examples) {
  EXPECT_TRUE(reflect(Vec2(1, 0), Cut2(0, kX)).isApprox(Vec2(-1, 0)));
  EXPECT_TRUE(reflect(Vec2(0.5, 7), Cut2(0.5, kX)).isApprox(Vec2(0.5, 7)));
  EXPECT_TRUE(reflect(Vec2(2, 3), Cut2(1, kX)).isApprox(Vec2(0, 3)));
}

TEST(Reflect, InvolutionAndIsometry) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    const Cut2 c(g(rng), Direction2(Vec2(g(rng), g(rng))));
    const Vec2 x(g(rng), g(rng)), y(g(rng), g(rng));
    EXPECT_LT((reflect(reflect(x, c), c) - x).norm(), 1e-12);
    EXPECT_NEAR((reflect(x, c) - reflect(y, c)).norm(), (x - y).norm(), 1e-12);
    const Vec2 on = c.lambda * c.omega.vector() + 3.0 * perp(c.omega.vector());
    EXPECT_LT((reflect(on, c) - on).norm(), 1e-12);
  }
  const Cut3 c3(0.3, Direction3(Vec3(1, 2, 2)));
  const Vec3 x(0.1, -0.4, 2.0);
  EXPECT_LT((reflect(reflect(x, c3), c3) - x).norm(), 1e-15);
}

TEST(Cap, SquareExamples) {
  const auto c = cap(unit_square(), Cut2(0.5, kX));
  EXPECT_NEAR(c.area(), 0.5, 1e-15);
  for (const auto& v : c.vertices()) EXPECT_GE(v.x(), 0.5 - 1e-15);
  EXPECT_TRUE(cap(unit_square(), Cut2(1.5, kX)).empty());
}

TEST(IsFoldable, Examples) {
  EXPECT_TRUE(is_foldable(unit_square(), Cut2(0.5, kX)));
  EXPECT_FALSE(is_foldable(unit_square(), Cut2(0.25, kX)));
  EXPECT_TRUE(is_foldable(parallelogram(), Cut2(0.5, kX)));
  EXPECT_FALSE(is_foldable(parallelogram(), Cut2(0.45, kX)));
  // Empty cap is vacuously foldable.
  EXPECT_TRUE(is_foldable(unit_square(), Cut2(3.0, kX)));
}

TEST(FoldingProfile, Examples) {
  const auto sq = folding_profile(unit_square(), kX);
  EXPECT_NEAR(sq.height, 0.5, 1e-8);
  const auto par = folding_profile(parallelogram(), kX);
  EXPECT_NEAR(par.lambda_min, 0.5, 1e-8);
  EXPECT_NEAR(par.height / breadth(parallelogram(), kX), 0.25, 1e-9);
}

TEST(FoldingProfile, BisectionMatchesScan) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const auto k = random_polygon(rng, 6 + i);
    for (const auto& w : uniform_directions(12)) {
      const double scan = scanned_lambda_min(k, w);
      const double step = breadth(k, w) / 4000;
      EXPECT_NEAR(folding_profile(k, w).lambda_min, scan, step + 1e-9);
    }
  }
}

TEST(FoldingProfile, MonotoneInLambda) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    const auto k = random_polygon(rng, 5 + i % 26);
    const auto w = direction_from_angle(ang(rng));
    const double top = support(k, w), bottom = -support(k, -w);
    bool seen = false;
    for (int j = 0; j <= 40; ++j) {
      const double lam = bottom + (top - bottom) * j / 40;
      const bool f = is_foldable(k, Cut2(lam, w));
      if (seen) EXPECT_TRUE(f) << "polygon " << i << " step " << j;
      seen = seen || f;
    }
  }
}

TEST(FoldingProfile, HeightAtMostHalfBreadth) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto k = random_polygon(rng, 5 + i % 26);
    for (const auto& w : uniform_directions(36)) {
      const auto p = folding_profile(k, w);
      EXPECT_LE(p.height, 0.5 * breadth(k, w) + k.tolerance());
      EXPECT_GE(p.height, 0.0);
      EXPECT_GE(p.lambda_min, -support(k, -w));
      EXPECT_LE(p.lambda_min, support(k, w));
    }
  }
}

TEST(Directions, FibonacciAreUnitAndSpread) {
  const auto d = fibonacci_directions(500);
  Vec3 mean = Vec3::Zero();
  for (const auto& w : d) {
    EXPECT_NEAR(w.vector().norm(), 1.0, 1e-12);
    mean += w.vector();
  }
  EXPECT_LT((mean / 500).norm(), 1e-2);
}

TEST(Heart, SquareCollapsesToCenter) {
  const auto h = heart(unit_square(), 720);
  EXPECT_LT(h.body.diameter(), 1e-3);
  EXPECT_LT((h.body.centroid() - Vec2(0.5, 0.5)).norm(), 1e-3);
}

// The parallelogram is centrally symmetric but has no mirror symmetry, so its heart does
// not shrink to the center: it stays a centrally symmetric polygon around (0, 0.5).
TEST(Heart, ParallelogramIsSymmetricAroundCenter) {
  const auto h = heart(parallelogram(), 720);
  const Vec2 c(0, 0.5);
  EXPECT_TRUE(h.body.contains(c));
  EXPECT_GT(h.body.diameter(), 0.3);
  for (const auto& v : h.body.vertices()) EXPECT_TRUE(h.body.contains(2 * c - v, 1e-7));
  // For omega = (0, 1) only trivial caps fold, so the vertical extent is not cut there.
  EXPECT_NEAR(folding_profile(parallelogram(), Direction2(Vec2(0, 1))).height, 0.0, 1e-8);
}

TEST(Heart, NestsUnderRefinement) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const auto k = random_polygon(rng, 7 + i);
    const auto fine = heart(k, 128);
    const auto coarse = heart(k, 64);
    for (const auto& v : fine.body.vertices()) {
      EXPECT_TRUE(coarse.body.contains(v, 1e-7));
      EXPECT_TRUE(k.contains(v, 1e-7));
    }
  }
}

TEST(Heart, RejectsTooFewDirections) {
  EXPECT_THROW(heart(unit_square(), 8), Error);
}

TEST(LemmaFold, SquareSymmetricCut) {
  const auto r = lemma_fold_check(unit_square(), Cut2(0, kX));
  EXPECT_TRUE(r.bound_holds);
  EXPECT_TRUE(r.media_holds);
  EXPECT_NEAR(r.mu, 0.75, 1e-15);
  EXPECT_TRUE(r.mu_foldable);
  EXPECT_TRUE(r.passed);
}

TEST(LemmaFold, ParallelogramOptimality) {
  const auto r = lemma_fold_check(parallelogram(), Cut2(0, kX));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(std::max(r.f_plus, r.f_minus), r.quarter_breadth, 1e-8);
  EXPECT_NEAR(std::max(r.f_plus, r.f_minus) / r.breadth, 0.25, 1e-9);
}

TEST(LemmaFold, NotAShadowThrows) {
  try {
    lemma_fold_check(builtin_domain("triangle"), Cut2(0.25, kX));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotAShadow);
  }
}

TEST(LemmaFold, RandomCorpus) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto k = random_polygon(rng, 5 + i % 26);
    const auto s = shadow_section_for_min_breadth(k);
    const auto r = lemma_fold_check(k, s.cut);
    EXPECT_TRUE(r.bound_holds) << i;
    EXPECT_TRUE(r.media_holds) << i;
    EXPECT_TRUE(r.mu_foldable) << i;
    EXPECT_TRUE(r.passed) << i;
  }
}

TEST(Rectangle, SquareIsRectangle) {
  const auto r = rectangle_rigidity_check(unit_square(), Cut2(0, kX), 0.05);
  EXPECT_TRUE(r.rectangle);
  EXPECT_TRUE(r.passed);
}

TEST(Rectangle, ThinTriangleSurrogateHolds) {
  const auto k = builtin_domain("thin-triangle");
  const auto r = rectangle_rigidity_check(k, shadow_section_for_min_breadth(k).cut, 0.05);
  EXPECT_FALSE(r.rectangle);
  EXPECT_TRUE(r.surrogate_holds);
  // One tilt sign loses the fold entirely, so the two-sided version does not hold.
  EXPECT_FALSE(r.two_sided_holds);
  EXPECT_TRUE(r.passed);
}

TEST(Rectangle, ParallelogramNoDrop) {
  const auto k = parallelogram();
  const auto r = rectangle_rigidity_check(k, shadow_section_for_min_breadth(k).cut, 0.05);
  EXPECT_FALSE(r.rectangle);
  EXPECT_TRUE(r.surrogate_holds);
  EXPECT_NEAR(r.near_min_ratio, 1.0, 1e-3);
}
