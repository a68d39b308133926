#include <gtest/gtest.h>

#include <cmath>

#include "nhft/ladder.hpp"
#include "nhft/quadrature.hpp"

using namespace nhft;

TEST(Ladder, ApplyRaisesAndLowers) {
  const auto up = apply({Ladder::Raise}, 3);
  ASSERT_TRUE(up.has_value());
  EXPECT_EQ(up->level, 4u);
  EXPECT_EQ(up->squared, 4u);
  const auto down = apply({Ladder::Lower}, 3);
  EXPECT_EQ(down->level, 2u);
  EXPECT_EQ(down->squared, 3u);
  EXPECT_FALSE(apply({Ladder::Lower}, 0).has_value());
  // number operator a† a: rightmost acts first
  const auto num = apply({Ladder::Raise, Ladder::Lower}, 5);
  EXPECT_EQ(num->level, 5u);
  EXPECT_EQ(num->squared, 25u);
}

TEST(Ladder, PositionSquaredDiagonal) {
  // <n|(a + a†)^2|n> = 2n + 1
  for (cplx omega : {cplx(1.0), cplx(2.0, 0.5), cplx(3.0, -1.0)})
    for (unsigned n = 0; n < 8; ++n) {
      const cplx x2 = diagonal_element(position_squared(omega), n);
      EXPECT_NEAR(std::abs(x2 - (n + 0.5) / omega), 0.0, 1e-14);
    }
}

TEST(Ladder, OffDiagonalWordsVanish) {
  const LadderPolynomial p{{1.0, {Ladder::Raise}}, {2.0, {Ladder::Raise, Ladder::Raise}}};
  EXPECT_EQ(diagonal_element(p, 4), cplx(0.0));
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (std::size_t n : {2u, 5u, 16u, 64u}) {
    const GaussRule& r = gauss_legendre(n);
    ASSERT_EQ(r.nodes.size(), n);
    for (unsigned deg = 0; deg < 2 * n; deg += 1) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(s, exact, 1e-13) << n << " " << deg;
    }
    EXPECT_TRUE(std::is_sorted(r.nodes.begin(), r.nodes.end()));
  }
}

TEST(PairwiseSum, OrderDeterminedAndAccurate) {
  std::vector<double> v(1000, 0.1);
  EXPECT_NEAR(pairwise_sum(v), 100.0, 1e-12);
  std::vector<cplx> c(7, cplx(1.0, -1.0));
  EXPECT_EQ(pairwise_sum(c), cplx(7.0, -7.0));
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}
