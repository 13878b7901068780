#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "assuredx/robustness.hpp"
#include "oracles.hpp"

using namespace assuredx;

namespace {

PriorSet vap_priors() {
  PriorSet p;
  p.sens = {25.9, 2.1};
  p.spec = {21, 36};
  p.prev = {29, 98};
  return p;
}

// Radius along phi at which the closed-form distance reaches epsilon,
// bracketed independently of the library search.
double reference_radius(const BetaParams& base, double epsilon, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  auto lb = [](long double a, long double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); };
  auto d = [&](double r) {
    const long double a = base.a + r * c, b = base.b + r * s;
    return static_cast<double>(-std::expm1(lb((base.a + a) / 2, (base.b + b) / 2) - 0.5L * (lb(a, b) + lb(base.a, base.b))));
  };
  double hi = 1e-6;
  while (d(hi) < epsilon) hi *= 1.5;
  double lo = 0.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (d(mid) < epsilon ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Hellinger, ZeroAtIdentity) {
  EXPECT_EQ(hellinger_squared({3, 4}, {3, 4}), 0.0);
  EXPECT_EQ(hellinger_distance({25.9, 2.1}, {25.9, 2.1}), 0.0);
}

TEST(Hellinger, SymmetricAndBounded) {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> u(-1.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const BetaParams p(std::exp(u(gen)), std::exp(u(gen))), q(std::exp(u(gen)), std::exp(u(gen)));
    const double d = hellinger_squared(p, q);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_NEAR(d, hellinger_squared(q, p), 1e-15);
    EXPECT_NEAR(hellinger_distance(p, q), std::sqrt(d), 1e-15);
  }
}

TEST(Hellinger, MatchesQuadratureOfAffinity) {
  std::mt19937_64 gen(67);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int i = 0; i < 50; ++i) {
    const BetaParams p(std::exp(u(gen)), std::exp(u(gen))), q(std::exp(u(gen)), std::exp(u(gen)));
    EXPECT_NEAR(hellinger_squared(p, q), oracle::one_minus_affinity(p.a, p.b, q.a, q.b), 1e-7)
        << p.a << " " << p.b << " " << q.a << " " << q.b;
  }
}

TEST(Hellinger, NormalShiftForm) {
  EXPECT_EQ(epsilon_from_normal_shift(0.0), 0.0);
  EXPECT_NEAR(epsilon_from_normal_shift(0.1), 1.0 - std::exp(-0.01 / 8.0), 1e-16);
  EXPECT_NEAR(epsilon_from_normal_shift(0.1), 0.00125, 1e-5);
}

TEST(Contour, PointsSitOnTheContour) {
  const double eps = 0.00354;
  for (const BetaParams base : {BetaParams(25.9, 2.1), BetaParams(29, 98), BetaParams(1, 1), BetaParams(0.6, 7)}) {
    const auto pts = epsilon_contour(base, eps, 64);
    ASSERT_EQ(pts.size(), 64u);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& pt = pts[k];
      EXPECT_NEAR(pt.phi, -std::numbers::pi + 2 * std::numbers::pi * k / 64.0, 1e-14);
      if (!pt.feasible) continue;
      EXPECT_NEAR(hellinger_squared(pt.params, base), eps, 1e-8);
      EXPECT_NEAR(pt.params.a, base.a + pt.r * std::cos(pt.phi), 1e-12);
      EXPECT_NEAR(pt.params.b, base.b + pt.r * std::sin(pt.phi), 1e-12);
      const double ref = reference_radius(base, eps, pt.phi);
      EXPECT_NEAR(pt.r, ref, 1e-8 * std::max(1.0, ref));
    }
  }
}

TEST(Contour, ZeroEpsilonIsTheBase) {
  for (const auto& pt : epsilon_contour({4, 5}, 0.0, 16)) {
    EXPECT_EQ(pt.r, 0.0);
    EXPECT_EQ(pt.params, BetaParams(4, 5));
    EXPECT_TRUE(pt.feasible);
  }
}

TEST(Contour, RejectsBadArguments) {
  EXPECT_THROW(epsilon_contour({4, 5}, 1.0, 16), std::domain_error);
  EXPECT_THROW(epsilon_contour({4, 5}, 1.5, 16), std::domain_error);
  EXPECT_THROW(epsilon_contour({4, 5}, -0.1, 16), std::domain_error);
  EXPECT_THROW(epsilon_contour({4, 5}, 0.01, 3), std::domain_error);
}

TEST(Contour, LargeEpsilonBlocksSomeAngles) {
  const auto pts = epsilon_contour({0.5, 0.5}, 0.99999, 8);
  int blocked = 0;
  for (const auto& pt : pts) {
    if (!pt.feasible) {
      ++blocked;
      EXPECT_GT(pt.params.a, 0.0);
      EXPECT_GT(pt.params.b, 0.0);
      EXPECT_LT(hellinger_squared(pt.params, {0.5, 0.5}), 0.99999);
    }
  }
  EXPECT_GT(blocked, 0);
}

TEST(SensitivityScan, SummaryMatchesPoints) {
  DesignSpec d;
  const auto rep = sensitivity_scan(vap_priors(), d, PriorSlot::sens, 0.00354, 32, 104, 10000, {4});
  ASSERT_EQ(rep.points.size(), 32u);
  EXPECT_EQ(rep.infeasible, 0);
  std::int64_t lo = 1 << 30, hi = 0;
  double amin = 1, amax = 0;
  for (const auto& sp : rep.points) {
    ASSERT_TRUE(sp.n_star.has_value());
    lo = std::min(lo, *sp.n_star);
    hi = std::max(hi, *sp.n_star);
    amin = std::min(amin, sp.assurance_at_eval);
    amax = std::max(amax, sp.assurance_at_eval);
    PriorSet varied = vap_priors();
    varied.sens = sp.point.params;
    EXPECT_NEAR(sp.assurance_at_eval, assurance_sensitivity(104, varied, d), 1e-12);
  }
  EXPECT_EQ(rep.n_min, lo);
  EXPECT_EQ(rep.n_max, hi);
  EXPECT_EQ(rep.a_min, amin);
  EXPECT_EQ(rep.a_max, amax);
  EXPECT_LE(rep.n_min, 104);
  EXPECT_GE(rep.n_max, 104);
}

TEST(SensitivityScan, ThreadCountIrrelevant) {
  DesignSpec d;
  const auto a = sensitivity_scan(vap_priors(), d, PriorSlot::prev, 0.00354, 16, 104, 10000, {1});
  const auto b = sensitivity_scan(vap_priors(), d, PriorSlot::prev, 0.00354, 16, 104, 10000, {6});
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].n_star, b.points[i].n_star);
    EXPECT_EQ(a.points[i].assurance_at_eval, b.points[i].assurance_at_eval);
  }
}

TEST(SensitivityScan, AngleRefinementStable) {
  // The sensitivity contour is a thin needle along the mean-preserving
  // direction; 64 angles step over its tips, 128 resolve them.
  DesignSpec d;
  const auto coarse = sensitivity_scan(vap_priors(), d, PriorSlot::sens, 0.00354, 128, 104, 10000, {8});
  const auto fine = sensitivity_scan(vap_priors(), d, PriorSlot::sens, 0.00354, 256, 104, 10000, {8});
  EXPECT_LT(std::abs(coarse.n_min - fine.n_min), 2);
  EXPECT_LT(std::abs(coarse.n_max - fine.n_max), 2);
  const auto prev64 = sensitivity_scan(vap_priors(), d, PriorSlot::prev, 0.00354, 64, 104, 10000, {8});
  const auto prev128 = sensitivity_scan(vap_priors(), d, PriorSlot::prev, 0.00354, 128, 104, 10000, {8});
  EXPECT_LT(std::abs(prev64.n_min - prev128.n_min), 2);
  EXPECT_LT(std::abs(prev64.n_max - prev128.n_max), 2);
}

TEST(SensitivityScan, ZeroEpsilonReproducesBase) {
  DesignSpec d;
  const auto rep = sensitivity_scan(vap_priors(), d, PriorSlot::sens, 0.0, 8, 104);
  const auto base = min_sample_size(vap_priors(), d);
  EXPECT_EQ(rep.n_min, *base);
  EXPECT_EQ(rep.n_max, *base);
}

TEST(SensitivityScan, EverythingBlockedThrows) {
  // So close to one that the positivity limit binds first along every ray.
  PriorSet p = vap_priors();
  p.sens = {0.5, 0.5};
  EXPECT_THROW(sensitivity_scan(p, DesignSpec{}, PriorSlot::sens, 0.9999999999, 8, 50), InfeasibleContour);
}

TEST(ConflictCheck, TailsAddUpWithPmf) {
  std::mt19937_64 gen(71);
  std::uniform_real_distribution<double> u(-1.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const BetaParams p(std::exp(u(gen)), std::exp(u(gen)));
    const std::int64_t n = 1 + static_cast<std::int64_t>(gen() % 300);
    const std::int64_t y = static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(n + 1));
    const auto r = prior_predictive_check(y, n, p);
    EXPECT_NEAR(r.percentile + r.tail_upper - r.pmf_observed, 1.0, 1e-10);
    EXPECT_NEAR(r.pmf_observed, oracle::bb_pmf(y, n, p.a, p.b), 1e-12);
  }
}

TEST(ConflictCheck, Flags) {
  // Two-sided band: a percentile near either end is flagged.
  const auto low = prior_predictive_check(0, 100, {50, 5});
  EXPECT_EQ(low.flag, ConflictFlag::conflict);
  const auto mid = prior_predictive_check(50, 100, {10, 10});
  EXPECT_EQ(mid.flag, ConflictFlag::consistent);
  const auto sus = prior_predictive_check(53, 150, {29, 98});
  EXPECT_EQ(sus.flag, ConflictFlag::suspect);
  EXPECT_EQ(to_string(ConflictFlag::suspect), "suspect");
}

TEST(ConflictCheck, FlagRuleAgainstTails) {
  for (std::int64_t y = 0; y <= 60; ++y) {
    const auto r = prior_predictive_check(y, 60, {3, 9});
    const double tail = std::min(r.percentile, r.tail_upper);
    const ConflictFlag expected =
        tail <= 0.01 ? ConflictFlag::conflict : tail <= 0.05 ? ConflictFlag::suspect : ConflictFlag::consistent;
    EXPECT_EQ(r.flag, expected) << y;
  }
}

TEST(ConflictCheck, RejectsBadArguments) {
  EXPECT_THROW(prior_predictive_check(5, 4, {1, 1}), std::domain_error);
  EXPECT_THROW(prior_predictive_check(-1, 4, {1, 1}), std::domain_error);
  EXPECT_THROW(prior_predictive_check(1, 4, {1, 1}, 0.99, 0.95), std::domain_error);
}
