#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "mmfe/linalg.hpp"
#include "mmfe/parallel.hpp"
#include "mmfe/random.hpp"

using namespace mmfe;

TEST(PairwiseSum, ExactOnIntegersAndStable) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  std::vector<double> tiny(1 << 20, 0.1);
  EXPECT_NEAR(pairwise_sum(tiny), 0.1 * (1 << 20), 1e-6);
  EXPECT_EQ(pairwise_sum(std::span<const double>{}), 0.0);
}

TEST(Random, CounterBasedDraws) {
  EXPECT_EQ(standard_normal_at(123), standard_normal_at(123));
  EXPECT_NE(hash_words({1, 2}), hash_words({2, 1}));
  RandomStream a(5, 1), b(5, 1), c(5, 2);
  EXPECT_EQ(a.normal(), b.normal());
  EXPECT_NE(a.normal(), c.normal());
  double s = 0.0, ss = 0.0;
  const int n = 200'000;
  RandomStream r(9, 0);
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    ss += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.01);
}

TEST(Linalg, Basics) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 1.0, 0.0, -0.7;
  EXPECT_NEAR(spectral_radius(a), 0.7, 1e-14);
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  EXPECT_TRUE(is_symmetric(m));
  EXPECT_NEAR(min_symmetric_eigenvalue(m), 1.0, 1e-14);
  const Eigen::MatrixXd f = psd_factor(m);
  EXPECT_LT((f * f.transpose() - m).norm(), 1e-14);
}
