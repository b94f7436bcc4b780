#include <flowforce/region.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

namespace ff = flowforce;

namespace {

// Plain bisection, independent of the library's bracketed Newton.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
  double flo = f(lo);
  for (int i = 0; i < 400 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double cubic_root(double r, double lo, double hi) {
  return bisect([r](double d) { return 2 * d * d * d - 2 * r * d * d + 1; }, lo, hi);
}

}  // namespace

TEST(StreamFromDepth, CriticalStream) {
  const ff::StreamFlow s = ff::stream_from_depth(1.0);
  EXPECT_DOUBLE_EQ(s.bernoulli, 1.5);
  EXPECT_DOUBLE_EQ(s.flow_force, 1.5);
  EXPECT_DOUBLE_EQ(s.froude, 1.0);
}

TEST(StreamFromDepth, FroudeTwoDepth) {
  EXPECT_NEAR(ff::stream_from_depth(std::pow(2.0, -2.0 / 3.0)).froude, 2.0, 1e-14);
}

TEST(StreamFromDepth, HeadTwoMatchesBisection) {
  const double d = cubic_root(2.0, 1e-6, 1.0);
  EXPECT_NEAR(d, 0.5970, 1e-4);
  EXPECT_NEAR(ff::stream_from_depth(d).bernoulli, 2.0, 1e-10);
}

TEST(StreamFromDepth, RejectsBadDepth) {
  EXPECT_THROW(ff::stream_from_depth(0.0), ff::DomainError);
  EXPECT_THROW(ff::stream_from_depth(-1.0), ff::DomainError);
  EXPECT_THROW(ff::stream_from_depth(std::nan("")), ff::DomainError);
  EXPECT_THROW(ff::stream_from_depth(INFINITY), ff::DomainError);
}

TEST(ConjugateDepths, HeadTwo) {
  const ff::ConjugateDepths cd = ff::conjugate_depths(2.0);
  EXPECT_NEAR(cd.d_minus, cubic_root(2.0, 1e-6, 1.0), 1e-10);
  EXPECT_NEAR(cd.d_plus, cubic_root(2.0, 1.0, 3.0), 1e-10);
  EXPECT_NEAR(cd.d_minus, 0.596968283237315, 1e-12);
  EXPECT_NEAR(cd.d_plus, 1.854637679718461, 1e-12);
  EXPECT_LT(cd.d_minus, 1.0);
  EXPECT_GT(cd.d_plus, 1.0);
  EXPECT_LE(std::abs(ff::stream_head(cd.d_minus) - 2.0), 1e-12);
  EXPECT_LE(std::abs(ff::stream_head(cd.d_plus) - 2.0), 1e-12);
}

TEST(ConjugateDepths, CuspNeedsFlag) {
  EXPECT_THROW(ff::conjugate_depths(1.5), ff::DomainError);
  const ff::ConjugateDepths cd = ff::conjugate_depths(1.5, true);
  EXPECT_EQ(cd.d_minus, 1.0);
  EXPECT_EQ(cd.d_plus, 1.0);
  EXPECT_THROW(ff::conjugate_depths(1.2), ff::DomainError);
  EXPECT_THROW(ff::conjugate_depths(std::nan("")), ff::DomainError);
}

TEST(ConjugateDepths, LargeHead) {
  const ff::ConjugateDepths cd = ff::conjugate_depths(10.0);
  EXPECT_NEAR(cd.d_plus, cubic_root(10.0, 1.0, 10.0), 1e-10);
  EXPECT_NEAR(cd.d_plus, 9.994994991231205, 1e-11);
  EXPECT_NEAR(cd.d_plus, 10.0 - 1.0 / 200.0, 1e-4);
}

TEST(Boundaries, CuspAndHeadTwo) {
  const ff::BoundaryPair cusp = ff::bl_boundaries(1.5);
  EXPECT_EQ(cusp.F_minus, 1.5);
  EXPECT_EQ(cusp.F_plus, 1.5);
  const ff::BoundaryPair b = ff::bl_boundaries(2.0);
  auto S = [](double d) { return 1.0 / d + 0.5 * d * d; };
  EXPECT_NEAR(b.F_minus, S(cubic_root(2.0, 1e-6, 1.0)), 1e-10);
  EXPECT_NEAR(b.F_plus, S(cubic_root(2.0, 1.0, 3.0)), 1e-10);
  EXPECT_NEAR(b.F_minus, 1.853316436162300, 1e-12);
  EXPECT_NEAR(b.F_plus, 2.259029334326628, 1e-12);
  EXPECT_THROW(ff::bl_boundaries(1.4), ff::DomainError);
}

TEST(Barrier, Values) {
  EXPECT_EQ(ff::barrier(0.0), 0.0);
  EXPECT_EQ(ff::barrier(2.0), 2.0);
  EXPECT_NEAR(ff::barrier(1.88988), 1.78583, 1e-5);
  EXPECT_THROW(ff::barrier(std::nan("")), ff::DomainError);
}

TEST(Barrier, LowerIntersection) {
  const ff::RegionCrossing c = ff::barrier_lower_intersection();
  const double oracle = bisect([](double r) { return ff::bl_boundaries(r).F_minus - 0.5 * r * r; }, 1.6, 2.5);
  EXPECT_NEAR(c.r_star, 3.0 * std::pow(2.0, -2.0 / 3.0), 1e-15);
  EXPECT_NEAR(c.r_star, oracle, 1e-10);
  EXPECT_NEAR(c.r_star, 1.8898816, 1e-7);
  EXPECT_NEAR(c.F_star, 0.5 * c.r_star * c.r_star, 1e-15);
  EXPECT_NEAR(c.F_star, 1.7858262, 1e-7);
  EXPECT_NEAR(ff::bl_boundaries(c.r_star).F_minus, c.F_star, 1e-10);
  EXPECT_NEAR(c.froude, 2.0, 1e-12);
}

TEST(AsymptoticGap, FrozenValues) {
  // 40-digit evaluations of F_plus(r) - r^2/2 - 1/(2r).
  const std::pair<double, double> cases[] = {
      {5.0, 2.0161949e-4}, {10.0, 1.2512519e-5}, {20.0, 7.8134767e-7}, {40.0, 4.8828888e-8}};
  for (const auto& [r, g] : cases) {
    const double gap = ff::asymptotic_gap(r);
    EXPECT_NEAR(gap / g, 1.0, 1e-6) << "r = " << r;
    EXPECT_GT(gap, 0.0);
    EXPECT_LT(gap * r * r, 1.0);
  }
  EXPECT_THROW(ff::asymptotic_gap(2.5), ff::DomainError);
}

TEST(AsymptoticGap, MatchesDirectEvaluation) {
  for (double r : {3.0, 7.5, 15.0}) {
    const double d = cubic_root(r, 1.0, r);
    const double direct = 1.0 / d + 0.5 * d * d - 0.5 * r * r - 0.5 / r;
    EXPECT_NEAR(ff::asymptotic_gap(r), direct, 1e-9 * r * r);
  }
}

TEST(Classify, Labels) {
  EXPECT_EQ(ff::classify(2.0, 1.5).classification, ff::RegionClass::below_lower);
  EXPECT_EQ(ff::classify(2.0, ff::bl_boundaries(2.0).F_minus).classification, ff::RegionClass::on_lower);
  EXPECT_EQ(ff::classify(2.0, 1.95).classification, ff::RegionClass::interior_below_barrier);
  EXPECT_EQ(ff::classify(2.0, 2.0).classification, ff::RegionClass::on_barrier);
  EXPECT_EQ(ff::classify(2.0, 2.1).classification, ff::RegionClass::interior_above_barrier);
  EXPECT_EQ(ff::classify(2.0, ff::bl_boundaries(2.0).F_plus).classification, ff::RegionClass::on_upper);
  EXPECT_EQ(ff::classify(2.0, 2.5).classification, ff::RegionClass::above_upper);
  EXPECT_EQ(ff::to_string(ff::RegionClass::on_barrier), "on_barrier");
}

TEST(Classify, ConsistentWithOrdering) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ur(1.51, 6.0), uf(0.0, 1.0);
  for (int n = 0; n < 500; ++n) {
    const double r = ur(rng);
    const ff::BoundaryPair b = ff::bl_boundaries(r);
    const double F = b.F_minus - 0.5 + (b.F_plus - b.F_minus + 1.0) * uf(rng);
    const ff::RegionClass c = ff::classify(r, F).classification;
    const double bar = ff::barrier(r);
    const double t = ff::classification_tolerance;
    const bool inside = F > b.F_minus + t && F < b.F_plus - t;
    if (F < b.F_minus - t) {
      EXPECT_EQ(c, ff::RegionClass::below_lower);
    } else if (F > b.F_plus + t) {
      EXPECT_EQ(c, ff::RegionClass::above_upper);
    } else if (inside && F < bar - t) {
      EXPECT_EQ(c, ff::RegionClass::interior_below_barrier);
    } else if (inside && F > bar + t) {
      EXPECT_EQ(c, ff::RegionClass::interior_above_barrier);
    }
  }
}

TEST(RegionSamples, Contract) {
  const auto rows = ff::region_samples(1.5, 3.0, 256);
  ASSERT_EQ(rows.size(), 256u);
  EXPECT_EQ(rows.front().r, 1.5);
  EXPECT_EQ(rows.back().r, 3.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].r, rows[i - 1].r);
  EXPECT_THROW(ff::region_samples(1.4, 3.0, 10), ff::DomainError);
  EXPECT_THROW(ff::region_samples(2.0, 2.0, 10), ff::DomainError);
}

// Properties over random depths and heads.

TEST(RegionProperties, FlowForceSimplification) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int n = 0; n < 1000; ++n) {
    const double d = std::exp(u(rng));
    const double r = ff::stream_head(d);
    const double long_form = 0.5 / d - 0.5 * d * d + r * d;
    const double S = ff::stream_flow_force(d);
    EXPECT_NEAR(S, long_form, 1e-12 * std::abs(S) * std::max(1.0, r * d / S));
  }
}

TEST(RegionProperties, BarrierCrossesLowerOnce) {
  const double rs = ff::barrier_lower_intersection().r_star;
  for (int n = 1; n < 400; ++n) {
    const double r = 1.5 + 4.5 * n / 400.0;
    if (std::abs(r - rs) < 1e-6) continue;
    const double diff = ff::bl_boundaries(r).F_minus - ff::barrier(r);
    if (r > rs) EXPECT_LT(diff, 0.0) << r;
    else EXPECT_GT(diff, 0.0) << r;
  }
}

TEST(RegionProperties, BarrierBelowUpper) {
  for (int n = 0; n < 400; ++n) {
    const double r = 1.5 + 40.0 * n / 400.0;
    EXPECT_LT(ff::barrier(r), ff::bl_boundaries(r).F_plus) << r;
  }
}

TEST(RegionProperties, ConjugateInvertsStream) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int n = 0; n < 300; ++n) {
    const double d = std::exp(u(rng));
    if (std::abs(d - 1.0) < 1e-2) continue;
    const ff::ConjugateDepths cd = ff::conjugate_depths(ff::stream_head(d));
    const double got = d < 1.0 ? cd.d_minus : cd.d_plus;
    EXPECT_NEAR(got, d, 1e-10 * std::max(1.0, d)) << d;
  }
}

TEST(RegionProperties, Monotonicity) {
  double prev_d = 1.0, prev_F = 1.5;
  for (int n = 1; n <= 300; ++n) {
    const double r = 1.5 + 0.05 * n;
    const double d = ff::conjugate_depths(r).d_plus;
    const double F = ff::bl_boundaries(r).F_plus;
    EXPECT_GT(d, prev_d);
    EXPECT_GT(F, prev_F);
    prev_d = d;
    prev_F = F;
  }
}
