#include <gtest/gtest.h>

#include <cmath>

#include "czvar/geometry.hpp"

using namespace czvar;

namespace {

// Independent closed form for the triangle wave, used as the oracle.
double sawtooth_oracle(double amplitude, double period, double y) {
  return (2.0 * amplitude / M_PI) * std::asin(std::sin(2.0 * M_PI * y / period));
}

GraphSpec affine_1d(double slope) {
  GraphSpec g;
  g.n = 1;
  g.d = 2;
  g.profile = GraphProfile::Affine;
  g.affine_matrix = {slope};
  g.affine_offset = {0.0};
  g.slope = std::abs(slope);
  g.domain_lo = Vec{-4.0};
  g.domain_hi = Vec{4.0};
  return g;
}

}  // namespace

TEST(EvalGraph, FlatProfile) {
  GraphSpec g = flat_graph(1, 2, Vec{-1.0}, Vec{1.0});
  Vec x = eval_graph(g, Vec{0.3});
  EXPECT_DOUBLE_EQ(x[0], 0.3);
  EXPECT_DOUBLE_EQ(x[1], 0.0);
}

TEST(EvalGraph, AffineProfile) {
  GraphSpec g = affine_1d(0.5);
  Vec x = eval_graph(g, Vec{2.0});
  EXPECT_DOUBLE_EQ(x[0], 2.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);
}

TEST(EvalGraph, SawtoothMatchesClosedFormOracle) {
  GraphSpec g = sawtooth_graph(1, 2, 0.25, 1.0, Vec{-2.0}, Vec{2.0});
  EXPECT_NEAR(eval_graph(g, Vec{0.25})[1], 0.25, 1e-12);
  Rng rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    double y = u(rng);
    EXPECT_NEAR(eval_graph(g, Vec{y})[1], sawtooth_oracle(0.25, 1.0, y), 1e-9)
        << "y = " << y;
  }
}

TEST(EvalGraph, RigidMotionApplied) {
  GraphSpec g = flat_graph(1, 2, Vec{-1.0}, Vec{1.0});
  double th = 0.3;
  g.motion = RigidMotion{{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)},
                         Vec{1.0, 2.0}};
  Vec x = eval_graph(g, Vec{0.5});
  EXPECT_NEAR(x[0], 1.0 + 0.5 * std::cos(th), 1e-15);
  EXPECT_NEAR(x[1], 2.0 + 0.5 * std::sin(th), 1e-15);
}

TEST(EvalGraph, SampledOutOfRangeIsDomainError) {
  GraphSpec g;
  g.n = 1;
  g.d = 2;
  g.profile = GraphProfile::Sampled;
  g.table = {{0.0, 0.0}, {1.0, 0.5}};
  g.slope = 0.5;
  g.domain_lo = Vec{0.0};
  g.domain_hi = Vec{1.0};
  EXPECT_NEAR(eval_graph(g, Vec{0.5})[1], 0.25, 1e-15);
  EXPECT_THROW(eval_graph(g, Vec{1.5}), std::domain_error);
}

TEST(AreaWeight, FlatIsOne) {
  GraphSpec g = flat_graph(2, 3, Vec{-1.0, -1.0}, Vec{1.0, 1.0});
  EXPECT_DOUBLE_EQ(area_weight(g, Vec{0.2, -0.7}), 1.0);
}

TEST(AreaWeight, AffineConstantGradient) {
  GraphSpec g = affine_1d(0.5);
  EXPECT_NEAR(area_weight(g, Vec{1.3}), std::sqrt(1.25), 1e-15);
}

TEST(AreaWeight, BumpMatchesFiniteDifferenceOracle) {
  GraphSpec g;
  g.n = 2;
  g.d = 3;
  g.profile = GraphProfile::BumpSum;
  g.bumps = {{Vec{0.1, -0.2}, 0.4, 0.6}, {Vec{-0.5, 0.3}, -0.2, 0.4}};
  g.slope = 1.0;
  g.domain_lo = Vec{-1.0, -1.0};
  g.domain_hi = Vec{1.0, 1.0};
  Rng rng(11);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int s = 0; s < 50; ++s) {
    Vec y{u(rng), u(rng)};
    auto jac = numeric_jacobian(g, y);
    double det = (1 + jac[0] * jac[0]) * (1 + jac[1] * jac[1]) -
                 jac[0] * jac[1] * jac[0] * jac[1];
    EXPECT_NEAR(area_weight(g, y), std::sqrt(det), 1e-6);
  }
}

TEST(AreaWeight, BoundedByCrudeSlopeBound) {
  GraphSpec g = sawtooth_graph(1, 2, 0.1125, 0.5, Vec{-2.0}, Vec{2.0});
  Rng rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int s = 0; s < 500; ++s) {
    double w = area_weight(g, Vec{u(rng)});
    EXPECT_GE(w, 1.0);
    EXPECT_LE(w, std::sqrt(1.0 + g.slope * g.slope) + 1e-12);
  }
}

TEST(AreaWeight, SawtoothKinkFlagged) {
  GraphSpec g = sawtooth_graph(1, 2, 0.25, 1.0, Vec{-2.0}, Vec{2.0});
  bool kink = false;
  area_weight(g, Vec{0.25}, &kink);
  EXPECT_TRUE(kink);
  kink = false;
  area_weight(g, Vec{0.1}, &kink);
  EXPECT_FALSE(kink);
}

TEST(Lipschitz, DeclaredSlopeHolds) {
  GraphSpec g = sawtooth_graph(1, 2, 0.1125, 0.5, Vec{-2.0}, Vec{2.0});
  auto rep = check_lipschitz(g, 2000, 5);
  EXPECT_TRUE(rep.within_declared);
  EXPECT_LE(rep.max_quotient, 0.9 + 1e-9);
}

TEST(Lipschitz, SharpnessProfileReportsHonestly) {
  GraphSpec g = circle_arc_graph(1.0);
  auto rep = check_lipschitz(g, 5000, 5);
  EXPECT_GT(rep.max_quotient, 1.0);   // really exceeds slope 1
  EXPECT_TRUE(rep.within_declared);   // but the profile is flagged
  EXPECT_LE(rep.max_quotient, 2.1);
}

TEST(SplitHV, Examples) {
  HVSplit s = split_hv(Vec{3.0, 4.0}, 1);
  EXPECT_EQ(s.h, (Vec{3.0, 0.0}));
  EXPECT_EQ(s.v, (Vec{0.0, 4.0}));
  HVSplit t = split_hv(Vec{1.0, 2.0, 3.0}, 2);
  EXPECT_EQ(t.h, (Vec{1.0, 2.0, 0.0}));
  EXPECT_EQ(t.v, (Vec{0.0, 0.0, 3.0}));
}

TEST(SplitHV, ReconstructionAndOrthogonality) {
  Rng rng(17);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < 1000; ++s) {
    Vec x(3);
    for (int i = 0; i < 3; ++i) x[i] = gauss(rng);
    HVSplit sp = split_hv(x, 2);
    EXPECT_EQ(sp.h + sp.v, x);  // exact coordinate split
    EXPECT_DOUBLE_EQ(sp.h.dot(sp.v), 0.0);
  }
}

TEST(Upsilon, ForwardExample) {
  Vec y = upsilon_map(Vec{3.0, 4.0}, 1, UpsilonDir::Forward);
  EXPECT_DOUBLE_EQ(y[0], 5.0);
  EXPECT_DOUBLE_EQ(y[1], 4.0);
}

TEST(Upsilon, InverseExample) {
  Vec x = upsilon_map(Vec{5.0, 4.0}, 1, UpsilonDir::Inverse);
  EXPECT_NEAR(x[0], 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(x[1], 4.0);
}

TEST(Upsilon, VerticalZeroIsFixedPoint) {
  Vec x{2.5, 0.0, 0.0};
  EXPECT_EQ(upsilon_map(x, 1, UpsilonDir::Forward), x);
  EXPECT_EQ(upsilon_map(x, 1, UpsilonDir::Inverse), x);
}

TEST(Upsilon, DomainErrors) {
  EXPECT_THROW(upsilon_map(Vec{0.0, 1.0}, 1, UpsilonDir::Forward), std::domain_error);
  EXPECT_THROW(upsilon_map(Vec{1.0, 2.0}, 1, UpsilonDir::Inverse), std::domain_error);
}

namespace {

Vec sample_cone(Rng& rng, int n, int d, double s) {
  Vec h = random_unit_vector(rng, n) * random_log_uniform(rng, 0.1, 10.0);
  Vec x(d);
  for (int i = 0; i < n; ++i) x[i] = h[i];
  Vec v = random_in_ball(rng, d - n, s * h.norm());
  for (int i = 0; i < d - n; ++i) x[n + i] = v[i];
  return x;
}

}  // namespace

TEST(Upsilon, RoundtripOnConeSamples) {
  Rng rng(23);
  for (int s = 0; s < 20000; ++s) {
    Vec x = sample_cone(rng, 1, 2, 0.9);
    Vec back = upsilon_map(upsilon_map(x, 1, UpsilonDir::Forward), 1, UpsilonDir::Inverse);
    EXPECT_LE(dist(back, x), 1e-10);
  }
}

TEST(Upsilon, ForwardMapsConeIntoTighterCone) {
  const double s = 0.7;
  const double target = s / std::sqrt(1.0 + s * s);
  Rng rng(29);
  for (int t = 0; t < 5000; ++t) {
    Vec y = upsilon_map(sample_cone(rng, 2, 3, s), 2, UpsilonDir::Forward);
    HVSplit sp = split_hv(y, 2);
    EXPECT_LE(sp.v.norm(), target * sp.h.norm() * (1.0 + 1e-12));
  }
}

TEST(Upsilon, EmpiricalBilipschitzStableUnderDoubling) {
  auto estimate = [](int count) {
    Rng rng(31);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int t = 0; t < count; ++t) {
      Vec x = sample_cone(rng, 1, 2, 0.9);
      Vec y = sample_cone(rng, 1, 2, 0.9);
      double dxy = dist(x, y);
      if (dxy < 1e-9) continue;
      double r = dist(upsilon_map(x, 1, UpsilonDir::Forward),
                      upsilon_map(y, 1, UpsilonDir::Forward)) /
                 dxy;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return std::pair{lo, hi};
  };
  auto [lo1, hi1] = estimate(20000);
  auto [lo2, hi2] = estimate(40000);
  EXPECT_GT(lo1, 0.0);
  EXPECT_TRUE(std::isfinite(hi1));
  EXPECT_GE(lo2 / lo1, 0.9);
  EXPECT_LE(lo2 / lo1, 1.1);
  EXPECT_GE(hi2 / hi1, 0.9);
  EXPECT_LE(hi2 / hi1, 1.1);
}

TEST(PhiMetric, ZeroOnEqualPoints) {
  EXPECT_DOUBLE_EQ(phi_metric(Vec{3.0, 4.0}, Vec{3.0, 4.0}, 1), 0.0);
}

TEST(PhiMetric, SymmetricOnConePairs) {
  Rng rng(37);
  for (int t = 0; t < 1000; ++t) {
    Vec x = sample_cone(rng, 1, 3, 0.8);
    Vec y = sample_cone(rng, 1, 3, 0.8);
    EXPECT_DOUBLE_EQ(phi_metric(x, y, 1), phi_metric(y, x, 1));
  }
}

TEST(PhiMetric, HighPrecisionFrozenValue) {
  // Phi((3,4),(5,4)) = |5 - sqrt(41)| with n = 1, evaluated independently
  // at extended precision: sqrt(41) - 5 = 1.4031242374328485...
  double phi = phi_metric(Vec{3.0, 4.0}, Vec{5.0, 4.0}, 1);
  EXPECT_NEAR(phi, 1.4031242374328485, 1e-15);
}

TEST(PhiMetric, ZeroHorizontalRejected) {
  EXPECT_THROW(phi_metric(Vec{0.0, 1.0}, Vec{1.0, 1.0}, 1), std::domain_error);
}

TEST(ConeInequality, ProofConstantsAtHalf) {
  ConeRatioResult r = cone_inequality_ratio(0.5, 1000, 1);
  EXPECT_NEAR(r.a, 0.15, 1e-15);
  EXPECT_NEAR(3.0 / r.a, 20.0, 1e-12);
  EXPECT_NEAR(r.bound, 20.0, 1e-12);
}

TEST(ConeInequality, HypothesisViolationRejected) {
  EXPECT_THROW(cone_inequality_ratio(1.0, 10, 1), std::domain_error);
  EXPECT_THROW(cone_inequality_ratio(1.5, 10, 1), std::domain_error);
}

TEST(ConeInequality, RatioBelowBoundAcrossSlopes) {
  for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    ConeRatioResult r = cone_inequality_ratio(s, 20000, 42);
    EXPECT_LE(r.max_ratio, r.bound) << "s = " << s;
    EXPECT_GT(r.accepted, 0);
  }
}

TEST(ConeInequality, HigherDimension) {
  ConeRatioResult r = cone_inequality_ratio(0.5, 20000, 42, 2, 3);
  EXPECT_LE(r.max_ratio, r.bound);
}

TEST(ConeInequality, DenseSamplingStableAcrossSeeds) {
  // With 1e6+ samples the sampled maximum agrees across seeds to three
  // significant digits.
  ConeRatioResult a = cone_inequality_ratio(0.5, 1000000, 1);
  ConeRatioResult b = cone_inequality_ratio(0.5, 1000000, 2);
  EXPECT_NEAR(a.max_ratio, b.max_ratio, 5e-4 * a.max_ratio);
}

TEST(Validate, BadDimensionsRejected) {
  GraphSpec g;
  g.n = 2;
  g.d = 2;
  EXPECT_THROW(validate_graph(g), std::invalid_argument);
}
