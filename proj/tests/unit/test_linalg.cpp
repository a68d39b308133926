#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nhft/errors.hpp"
#include "nhft/linalg.hpp"
#include "nhft/models.hpp"
#include "oracles.hpp"

using namespace nhft;

namespace {

double backward_error(const ComplexMatrix& m, const RawSpectrum& s, std::size_t i) {
  const ComplexVector mv = m * s.right_vectors[i];
  double r = 0.0;
  for (std::size_t k = 0; k < mv.size(); ++k)
    r += std::norm(mv[k] - s.eigenvalues[i] * s.right_vectors[i][k]);
  return std::sqrt(r);
}

}  // namespace

TEST(ComplexMatrix, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(ComplexMatrix(2, std::vector<cplx>(3)), InvalidInput);
  EXPECT_THROW((ComplexMatrix{{1.0, 2.0}, {3.0}}), InvalidInput);
  ComplexMatrix m = ComplexMatrix::identity(2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(m.validate(), InvalidInput);
}

TEST(Eigendecompose, IdentityHasUnitEigenvalues) {
  const RawSpectrum s = eigendecompose(ComplexMatrix::identity(3));
  ASSERT_EQ(s.dim(), 3u);
  for (const cplx& e : s.eigenvalues) EXPECT_NEAR(std::abs(e - 1.0), 0.0, 1e-14);
}

TEST(Eigendecompose, DimerUnbrokenEigenvalues) {
  const RawSpectrum s = eigendecompose(build(ModelInstance::two_level(0.6)));
  EXPECT_NEAR(std::abs(s.eigenvalues[0] - cplx(-0.8)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(s.eigenvalues[1] - cplx(0.8)), 0.0, 1e-13);
}

TEST(Eigendecompose, MatchesCharacteristicPolynomialRoots) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ComplexMatrix m = oracle::random_matrix(6, seed);
    const RawSpectrum s = eigendecompose(m);
    const auto roots = oracle::polynomial_roots(oracle::charpoly(m));
    EXPECT_LT(oracle::multiset_distance(s.eigenvalues, roots), 1e-9) << "seed " << seed;
  }
}

TEST(Eigendecompose, BackwardErrorWithinTolerance) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ComplexMatrix m = oracle::random_matrix(3 + seed % 10, seed);
    const RawSpectrum s = eigendecompose(m, 1e-12);
    const double scale = frobenius_norm(m);
    for (std::size_t i = 0; i < s.dim(); ++i) {
      EXPECT_LE(backward_error(m, s, i), 1e-12 * scale);
      EXPECT_LE(s.residuals[i], 1e-12);
      EXPECT_NEAR(norm2(s.right_vectors[i]), 1.0, 1e-12);
    }
  }
}

TEST(Eigendecompose, CanonicalOrderIsRealThenImaginary) {
  const ComplexMatrix m = ComplexMatrix::diagonal(std::vector<cplx>{{2, 0}, {-1, 1}, {-1, -1}, {0, 3}});
  const RawSpectrum s = eigendecompose(m);
  const std::vector<cplx> expected{{-1, -1}, {-1, 1}, {0, 3}, {2, 0}};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(s.eigenvalues[i] - expected[i]), 0.0, 1e-14);
}

TEST(Eigendecompose, DeterministicAcrossCalls) {
  const ComplexMatrix m = oracle::random_matrix(12, 77);
  const RawSpectrum a = eigendecompose(m), b = eigendecompose(m);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.right_vectors, b.right_vectors);
}

TEST(Eigendecompose, TraceEqualsEigenvalueSum) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const ComplexMatrix m = oracle::random_matrix(8, seed);
    cplx sum = 0.0;
    for (const cplx& e : eigenvalues(m)) sum += e;
    EXPECT_LT(std::abs(sum - trace(m)), 1e-11);
  }
}

TEST(Eigendecompose, AdjointSpectrumIsConjugate) {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const ComplexMatrix m = oracle::random_matrix(7, seed);
    auto ev = eigenvalues(m);
    for (auto& e : ev) e = std::conj(e);
    EXPECT_LT(oracle::multiset_distance(ev, eigenvalues(adjoint(m))), 1e-10);
  }
}

TEST(Eigendecompose, Errors) {
  ComplexMatrix bad(2);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(eigendecompose(bad), InvalidInput);
  EXPECT_THROW(eigendecompose(ComplexMatrix::identity(2), 0.0), InvalidInput);

  EigenOptions starved;
  starved.sweeps_per_dim = 0;  // floor of 30 sweeps is far too few here
  try {
    (void)eigendecompose(oracle::random_matrix(60, 5), starved);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_FALSE(e.failed_indices.empty());
  }
}

TEST(Adjoint, HermitianIsFixedPoint) {
  const ComplexMatrix h = oracle::random_hermitian(5, 3);
  EXPECT_LT(oracle::max_abs_diff(adjoint(h), h), 1e-15);
}

TEST(Adjoint, DimerMapsLambdaToMinusLambda) {
  EXPECT_EQ(adjoint(build(ModelInstance::two_level(0.7))), build(ModelInstance::two_level(-0.7)));
}

TEST(Adjoint, MatchesEntrywiseLoopAndIsInvolution) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ComplexMatrix m = oracle::random_matrix(4 + seed, seed);
    EXPECT_EQ(adjoint(m), oracle::adjoint_loop(m));
    EXPECT_EQ(adjoint(adjoint(m)), m);
  }
}

TEST(Invert, TrivialCases) {
  EXPECT_LT(oracle::max_abs_diff(invert(ComplexMatrix::identity(4)), ComplexMatrix::identity(4)), 1e-15);
  const ComplexMatrix d = ComplexMatrix::diagonal(std::vector<cplx>{2.0, {0, 1}});
  const ComplexMatrix expected = ComplexMatrix::diagonal(std::vector<cplx>{0.5, {0, -1}});
  EXPECT_LT(oracle::max_abs_diff(invert(d), expected), 1e-15);
}

TEST(Invert, ResidualScaledByCondition) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ComplexMatrix m = oracle::random_matrix(9, seed);
    const Inversion inv = invert_with_condition(m);
    const ComplexMatrix r = m * inv.inverse - ComplexMatrix::identity(9);
    EXPECT_LE(frobenius_norm(r), 1e-12 * inv.condition_estimate);
    // invert . invert = identity map
    const ComplexMatrix back = invert(inv.inverse);
    EXPECT_LE(frobenius_norm(back - m), 10 * 1e-12 * inv.condition_estimate * frobenius_norm(m));
  }
}

TEST(Invert, SingularMatrixReportsCondition) {
  ComplexMatrix m{{1.0, 2.0}, {2.0, 4.0}};
  EXPECT_THROW(invert(m), SingularMatrix);
  ComplexMatrix near{{1.0, 1.0}, {1.0, 1.0 + 1e-17}};
  try {
    invert(near);
    FAIL();
  } catch (const SingularMatrix& e) {
    EXPECT_GT(e.condition_estimate, 1e15);
  }
}
