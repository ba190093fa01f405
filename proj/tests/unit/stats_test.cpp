#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <random>

#include "colm/metrics.hpp"

namespace colm::metrics {
namespace {

TEST(IncompleteBeta, MatchesBoost) {
  for (double a : {0.5, 1.0, 2.5, 7.0, 30.0}) {
    for (double b : {0.5, 1.0, 3.0, 12.0}) {
      for (double x : {0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0}) {
        EXPECT_NEAR(regularized_incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-10)
            << a << ' ' << b << ' ' << x;
      }
    }
  }
}

TEST(StudentT, MatchesBoost) {
  for (double dof : {1.0, 2.0, 5.0, 28.0, 200.0}) {
    boost::math::students_t dist(dof);
    for (double t : {0.0, 0.3, -1.2, 2.0, 4.5}) {
      const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
      EXPECT_NEAR(student_t_two_tailed(t, dof), expected, 1e-10) << t << ' ' << dof;
    }
  }
}

TEST(Pearson, HandExample) {
  // Centred ys are (1, -1, 0) against (-1, 0, 1): r = -1/2. With one degree
  // of freedom t is Cauchy, so p = 1 - (2/pi) atan(1/sqrt(3)) = 2/3.
  const std::vector<double> xs = {1, 2, 3}, ys = {3, 1, 2};
  const auto c = pearson(xs, ys);
  EXPECT_NEAR(c.r, -0.5, 1e-12);
  EXPECT_NEAR(c.p_two_tailed, 2.0 / 3.0, 1e-10);
  EXPECT_EQ(c.n, 3u);
}

TEST(Pearson, PerfectAndRejected) {
  const std::vector<double> xs = {1, 2, 3, 4}, ys = {2, 4, 6, 8};
  const auto c = pearson(xs, ys);
  EXPECT_NEAR(c.r, 1.0, 1e-12);
  EXPECT_NEAR(c.p_two_tailed, 0.0, 1e-12);
  const std::vector<double> flat = {1, 1, 1, 1}, two = {1, 2};
  EXPECT_THROW(pearson(xs, flat), MetricError);
  EXPECT_THROW(pearson(two, two), MetricError);
  EXPECT_THROW(pearson(xs, two), MetricError);
}

TEST(Pearson, AffineInvarianceAndBoostPValue) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 40;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = normal(rng);
      ys[i] = 0.5 * xs[i] + normal(rng);
    }
    const auto c = pearson(xs, ys);
    ASSERT_LE(std::fabs(c.r), 1.0);
    std::vector<double> xs2(n), ys2(n);
    const double a = 0.1 + static_cast<double>(rng() % 100) / 10.0;
    for (std::size_t i = 0; i < n; ++i) {
      xs2[i] = a * xs[i] + 3.0;
      ys2[i] = -ys[i] / a - 7.0;
    }
    const auto c2 = pearson(xs2, ys2);
    EXPECT_NEAR(c2.r, -c.r, 1e-9);
    EXPECT_NEAR(c2.p_two_tailed, c.p_two_tailed, 1e-9);

    const double dof = static_cast<double>(n - 2);
    const double t = c.r * std::sqrt(dof / std::max(1e-300, 1.0 - c.r * c.r));
    boost::math::students_t dist(dof);
    EXPECT_NEAR(c.p_two_tailed,
                2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 1e-9);
  }
}

}  // namespace
}  // namespace colm::metrics
