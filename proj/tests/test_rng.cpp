#include <gtest/gtest.h>

#include <cmath>

#include "uavmeta/rng.hpp"
#include "uavmeta/sim.hpp"

using namespace uavmeta;

TEST(Rng, StreamsAreDeterministic) {
  rng::Stream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDecorrelateAcrossIndices) {
  rng::Stream a(42, 0), b(42, 1);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  EXPECT_EQ(same, 0);
}

TEST(Rng, UniformMoments) {
  rng::Stream s(1, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.003);
  EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 0.003);
}

TEST(Rng, ExponentialAndGammaMeans) {
  rng::Stream s(3, 5);
  const int n = 200000;
  double se = 0.0, sg = 0.0, sg2 = 0.0;
  for (int i = 0; i < n; ++i) {
    se += s.exponential();
    const double g = s.gamma_norm(3);
    sg += g;
    sg2 += g * g;
  }
  EXPECT_NEAR(se / n, 1.0, 0.01);
  EXPECT_NEAR(sg / n, 1.0, 0.01);                    // unit mean
  EXPECT_NEAR(sg2 / n - 1.0, 1.0 / 3.0, 0.01);       // variance 1/m
}

TEST(Rng, PoissonMeansSmallAndLarge) {
  rng::Stream s(11, 2);
  for (double mean : {3.0, 25.0, 80.0, 251.3}) {
    const int n = 40000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += s.poisson(mean);
    EXPECT_NEAR(acc / n, mean, 4.0 * std::sqrt(mean / n) + 0.02) << mean;
  }
}

TEST(Rng, PoissonChopDownAndPtrsAgreeInDistribution) {
  // compare means and variances straddling the algorithm switch at 30
  rng::Stream s(13, 0);
  for (double mean : {29.5, 30.5}) {
    const int n = 120000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = double(s.poisson(mean));
      m1 += k;
      m2 += k * k;
    }
    m1 /= n;
    m2 = m2 / n - m1 * m1;
    EXPECT_NEAR(m1, mean, 0.15) << mean;
    EXPECT_NEAR(m2, mean, 1.2) << mean;
  }
}

TEST(Rng, DiskPointIsUniform) {
  rng::Stream s(17, 4);
  const int n = 100000;
  int inner = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = s.disk_point(10.0);
    const double r = std::hypot(p[0], p[1]);
    ASSERT_LE(r, 10.0);
    if (r < 5.0) ++inner;  // quarter of the area
  }
  EXPECT_NEAR(double(inner) / n, 0.25, 0.006);
}

TEST(Rng, FastLogMatchesStdLog) {
  rng::Stream s(23, 9);
  double worst = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = s.uniform();
    const double a = detail_sim::fast_log(u);
    const double b = std::log(u);
    worst = std::max(worst, std::fabs(a - b) / std::max(1.0, std::fabs(b)));
  }
  EXPECT_LT(worst, 1e-9);
}
