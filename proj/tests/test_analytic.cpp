#include <gtest/gtest.h>

#include <cmath>

#include "chargegrid/analytic.hpp"
#include "chargegrid/monte_carlo.hpp"

using namespace chargegrid;
using namespace chargegrid::analytic;

namespace {

const ThinningSpec kPower = PowerLaw{1.0, 500.0};

// Richardson-extrapolated central difference.
template <class F>
double derivative(F&& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

}  // namespace

TEST(NearestRoad, ZeroAndNegativeDistance) {
  const auto sd = SourceDestPair::parallel(500.0, 2000.0, 300.0);
  EXPECT_EQ(cdf_nearest_charging_given_sd(kPower, 0.01, sd, Axis::vertical, 0.0), 0.0);
  EXPECT_THROW(cdf_nearest_charging_given_sd(kPower, 0.01, sd, Axis::vertical, -1.0), InvalidParameter);
  EXPECT_THROW(pdf_nearest_noncharging_given_sd(kPower, 0.01, sd, Axis::vertical, -1.0), InvalidParameter);
}

TEST(NearestRoad, PowerLawPlugIn) {
  const auto sd = SourceDestPair::parallel(500.0, 2000.0, 300.0);
  EXPECT_NEAR(cdf_nearest_charging_given_sd(kPower, 0.01, sd, Axis::vertical, 500.0), 0.96875, 1e-9);
  EXPECT_NEAR(pdf_nearest_charging_given_sd(kPower, 0.01, sd, Axis::vertical, 500.0), 1.5625e-4, 1e-12);
}

TEST(NearestRoad, ConstantProfileIsExponential) {
  const double lambda = 0.004;
  for (double p : {0.0, 0.2, 0.7, 1.0}) {
    const ThinningSpec u = Uniform{p};
    for (const auto& sd : {SourceDestPair::parallel(-300.0, -2000.0, 700.0),
                           SourceDestPair::perpendicular(100.0, -900.0, 50.0, 40.0, -1)})
      for (Axis axis : {Axis::vertical, Axis::horizontal})
        for (double x : {1.0, 150.0, 2000.0}) {
          EXPECT_NEAR(cdf_nearest_charging_given_sd(u, lambda, sd, axis, x), 1 - std::exp(-lambda * p * x), 1e-14);
          EXPECT_NEAR(pdf_nearest_charging_given_sd(u, lambda, sd, axis, x),
                      lambda * p * std::exp(-lambda * p * x), 1e-16);
          EXPECT_NEAR(cdf_nearest_noncharging_given_sd(u, lambda, sd, axis, x),
                      1 - std::exp(-lambda * (1 - p) * x), 1e-14);
        }
  }
}

TEST(NearestRoad, NonChargingCdfZeroInsidePlateau) {
  const auto sd = SourceDestPair::parallel(100.0, 900.0, 10.0);
  EXPECT_EQ(cdf_nearest_noncharging_given_sd(kPower, 0.01, sd, Axis::vertical, 400.0), 0.0);
  EXPECT_GT(cdf_nearest_noncharging_given_sd(kPower, 0.01, sd, Axis::vertical, 450.0), 0.0);
}

TEST(NearestRoad, PdfMatchesFiniteDifferences) {
  const double lambda = 0.01;
  for (double alpha : {0.5, 1.0, 2.0})
    for (const auto& sd : {SourceDestPair::parallel(-1300.0, 2500.0, 900.0),
                           SourceDestPair::parallel(800.0, -600.0, 400.0, 200.0, -1)})
      for (Axis axis : {Axis::vertical, Axis::horizontal})
        for (RoadClass cls : {RoadClass::charging, RoadClass::non_charging})
          for (double x : {37.0, 333.0, 1111.0, 1717.0}) {
            const ThinningSpec spec = PowerLaw{alpha, 450.0};
            auto F = [&](double t) { return nearest_road_cdf(spec, lambda, sd, axis, cls, t); };
            const double pdf = nearest_road_pdf(spec, lambda, sd, axis, cls, x);
            const double fd = derivative(F, x, 0.5);
            EXPECT_NEAR(pdf, fd, 1e-6 * std::abs(pdf) + 1e-15) << alpha << ' ' << x;
          }
}

TEST(NearestRoad, CdfsMonotoneAndBounded) {
  const auto sd = SourceDestPair::parallel(-700.0, 3000.0, 500.0);
  for (RoadClass cls : {RoadClass::charging, RoadClass::non_charging}) {
    double prev = 0.0;
    for (double x = 0.0; x < 6000.0; x += 25.0) {
      const double F = nearest_road_cdf(PowerLaw{2.0, 300.0}, 0.01, sd, Axis::vertical, cls, x);
      EXPECT_GE(F, prev - 1e-15);
      EXPECT_LE(F, 1.0);
      prev = F;
    }
  }
}

TEST(Unconditional, ConstantProfileAndZero) {
  const SourceDestDistribution dist{UniformDensity{-2000.0, 2000.0}, UniformDensity{-2000.0, 2000.0}};
  EXPECT_EQ(cdf_nearest_charging_unconditional(Uniform{0.3}, 0.01, dist, 0.0), 0.0);
  EXPECT_NEAR(cdf_nearest_charging_unconditional(Uniform{0.3}, 0.01, dist, 250.0), 1 - std::exp(-0.75), 1e-6);
}

TEST(Unconditional, MatchesMonteCarlo) {
  const SourceDestDistribution dist{UniformDensity{-2000.0, 2000.0}, UniformDensity{-2000.0, 2000.0}};
  const double analytic = cdf_nearest_charging_unconditional(kPower, 0.01, dist, 300.0);
  const DistributionPlacement place{dist, UniformDensity{-2000.0, 2000.0}, 1.0};
  const auto mc = sample_nearest_distances(kPower, 0.01, place, Axis::vertical, 100000, 77);
  EXPECT_NEAR(mc.charging(300.0), analytic, 0.01);
}

TEST(Unconditional, PowerLawDensityIntegratesToOne) {
  const Density d(PowerLawDensity{1.3, 400.0, -3000.0, 5000.0});
  const double total = quad::integral([&](double x) { return d.pdf(x); }, -3000.0, 5000.0, d.breakpoints());
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_NEAR(d.cdf(5000.0), 1.0, 1e-12);
}

TEST(GapX, SupportBounds) {
  const auto sd = SourceDestPair::parallel(0.0, 2000.0, 800.0);
  EXPECT_EQ(cdf_gap_X(Uniform{0.5}, 0.01, sd, Axis::vertical, 0.0), 0.0);
  EXPECT_EQ(cdf_gap_X(Uniform{0.5}, 0.01, sd, Axis::vertical, 2000.0), 1.0);
  EXPECT_EQ(cdf_gap_X(Uniform{0.5}, 0.01, sd, Axis::vertical, 5000.0), 1.0);
  EXPECT_THROW(cdf_gap_X(Uniform{1.0}, 0.01, sd, Axis::vertical, 10.0), ConditioningDegenerate);
}

TEST(GapX, MatchesConditionedMonteCarlo) {
  const auto sd = SourceDestPair::parallel(0.0, 2000.0, 800.0);
  const auto mc = sample_gap(Uniform{0.5}, 0.01, sd, Axis::vertical, 20000, 5);
  const double ks = mc.ks_distance([&](double x) { return cdf_gap_X(Uniform{0.5}, 0.01, sd, Axis::vertical, x); });
  EXPECT_LT(ks, 0.02);
}

TEST(GapX, PowerLawMonotone) {
  const auto sd = SourceDestPair::parallel(600.0, 1600.0, 900.0);
  double prev = 0.0;
  for (double x = 0.0; x <= 900.0; x += 30.0) {
    const double F = cdf_gap_X(kPower, 0.02, sd, Axis::horizontal, x);
    EXPECT_GE(F, prev - 1e-12);
    prev = F;
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(EventTree, T3PlugIn) {
  const auto sd = SourceDestPair::parallel(600.0, 1200.0, 500.0);
  EXPECT_NEAR(event_probs_T3(kPower, 0.01, sd).t3, (1 - 5.0 / 6.0) * (5.0 / 12.0), 1e-15);
  EXPECT_NEAR(event_probs_T3(kPower, 0.01, sd).t3, 0.0694, 5e-5);
  EXPECT_EQ(event_probs_T3(Uniform{1.0}, 0.01, sd).t3, 0.0);
  EXPECT_EQ(event_probs_T3(Uniform{0.0}, 0.01, sd).t3, 0.0);
  EXPECT_THROW(event_probs_T3(kPower, 0.01, SourceDestPair::perpendicular(0, 100, 50)), InvalidParameter);
}

TEST(EventTree, EightEventsPartition) {
  for (const auto& sd : {SourceDestPair::parallel(600.0, 1200.0, 500.0),
                         SourceDestPair::perpendicular(-900.0, 300.0, 200.0)}) {
    const auto p = event_probabilities(kPower, sd);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
}

TEST(EventTree, LeavesSumToT3) {
  for (double lambda : {0.002, 0.01, 0.02})
    for (const auto& sd : {SourceDestPair::parallel(600.0, 1600.0, 800.0),
                           SourceDestPair::parallel(-200.0, -2500.0, 1500.0, 100.0, -1),
                           SourceDestPair::parallel(1000.0, 1300.0, 3000.0)}) {
      const auto leaves = t3_leaf_probabilities(kPower, lambda, sd);
      double sum = 0.0;
      for (double v : leaves) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, event_probs_T3(kPower, lambda, sd).t3, 1e-6);
    }
}

TEST(LeafL35, SupportIndicators) {
  const auto sd = SourceDestPair::parallel(600.0, 1600.0, 800.0);
  EXPECT_EQ(leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::d_n, 800.0), 1.0);
  EXPECT_EQ(leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::d_n, 900.0), 1.0);
  EXPECT_EQ(leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::rho_c, 999.0), 0.0);
  EXPECT_EQ(leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::rho_c, 1800.0), 1.0);
  double prev = 0.0;
  for (double x = 1000.0; x <= 1800.0; x += 20.0) {
    const double F = leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::rho_c, x);
    EXPECT_GE(F, prev - 1e-12);
    prev = F;
  }
  prev = 0.0;
  for (double x = 0.0; x <= 800.0; x += 20.0) {
    const double F = leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::d_n, x);
    EXPECT_GE(F, prev - 1e-12);
    prev = F;
  }
}

TEST(LeafL35, DistanceAndChargedLengthAreComplementary) {
  // On this leaf the charged length is d_h + d_v - D_n.
  const auto sd = SourceDestPair::parallel(600.0, 1600.0, 800.0);
  for (double t : {50.0, 200.0, 450.0, 700.0}) {
    const double dn = leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::d_n, t);
    const double rho = leaf_L35_metric_cdf(kPower, 0.02, sd, Metric::rho_c, 1800.0 - t);
    EXPECT_NEAR(dn + rho, 1.0, 1e-8);
  }
}
