#include <gtest/gtest.h>

#include <cmath>

#include "nhft/biortho.hpp"
#include "nhft/errors.hpp"
#include "nhft/hft.hpp"
#include "nhft/models.hpp"
#include "oracles.hpp"

using namespace nhft;

namespace {

const cplx I{0.0, 1.0};

ComplexMatrix dimer_g(double l) {
  ComplexMatrix g{{1.0, I * l}, {-I * l, 1.0}};
  g *= 1.0 / std::sqrt(1.0 - l * l);
  return g;
}

// Middle-region metric reference for the 4x4 chain.
ComplexMatrix four_level_g_middle(double l) {
  const double s5 = std::sqrt(5.0), l2 = l * l, l4 = l2 * l2;
  const double g24 = -1.0 + (3.0 + 2.0 * s5) * l2 - (1.0 + s5) * l4;
  const double g44 = 3.0 + (3.0 + s5) * l2 * (-3.0 + l2);
  ComplexMatrix g{
      {-s5, -I * l * s5, -s5 * (l2 - 1.0), -I * l * s5 * (l2 - 2.0)},
      {I * l * s5, 2.0 - (6.0 + s5) * l2 + 2.0 * l4, I * l * (l2 - 1.0), g24},
      {-s5 * (l2 - 1.0), -I * l * (l2 - 1.0), -s5 * l2, -I * l * s5},
      {I * l * s5 * (l2 - 2.0), g24, I * l * s5, g44},
  };
  g *= 1.0 / (10.0 * (1.0 - 3.0 * l2 + l4));
  return g;
}

// Right vectors rescaled so their last component is 1.
BiorthoSpectrum last_component_gauge(const BiorthoSpectrum& s) {
  std::vector<cplx> f(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) f[i] = 1.0 / s.rights[i].back();
  return regauge_rights(s, f);
}

}  // namespace

TEST(PairLeftRight, HermitianLeftsEqualRights) {
  const ComplexMatrix h = oracle::random_hermitian(6, 11);
  const BiorthoSpectrum s = pair_left_right(h);
  for (std::size_t i = 0; i < s.dim(); ++i) {
    EXPECT_FALSE(s.defective[i]);
    EXPECT_NEAR(std::abs(s.self_overlaps[i]), 1.0, 1e-12);
    for (std::size_t k = 0; k < s.dim(); ++k)
      EXPECT_NEAR(std::abs(s.lefts[i][k] - s.rights[i][k]), 0.0, 1e-12);
  }
  EXPECT_LT(oracle::max_abs_diff(build_g_metric(s).matrix, ComplexMatrix::identity(6)), 1e-12);
}

TEST(PairLeftRight, DimerUnbrokenIsBiorthonormal) {
  const BiorthoSpectrum s = pair_left_right(build(ModelInstance::two_level(0.5)));
  EXPECT_LT(std::abs(inner(s.lefts[0], s.rights[1])), 1e-12);
  EXPECT_LT(std::abs(inner(s.lefts[1], s.rights[0])), 1e-12);
  EXPECT_NEAR(std::abs(inner(s.lefts[0], s.rights[0]) - 1.0), 0.0, 1e-14);
  // symmetric split: ||L|| = ||R||
  EXPECT_NEAR(norm2(s.lefts[0]), norm2(s.rights[0]), 1e-12);
}

TEST(PairLeftRight, DimerAtExceptionalPointIsDefective) {
  const BiorthoSpectrum s = pair_left_right(build(ModelInstance::two_level(1.0)));
  EXPECT_TRUE(s.defective[0]);
  EXPECT_TRUE(s.defective[1]);
  EXPECT_LT(s.min_self_overlap(), 1e-6);
  EXPECT_THROW(build_g_metric(s), DefectiveSpectrum);
}

TEST(PairLeftRight, IdentityDegeneracyResolvedByOverlap) {
  const BiorthoSpectrum s = pair_left_right(ComplexMatrix::identity(4));
  EXPECT_LT(biorthogonality_error(s), 1e-12);
  EXPECT_LT(completeness_error(s), 1e-12);
}

TEST(GMetric, DimerClosedFormAndInverseRoute) {
  for (double l : {0.1, 0.5, 0.9}) {
    const BiorthoSpectrum s = pair_left_right(build(ModelInstance::two_level(l)));
    const GMetric g = build_g_metric(s);
    EXPECT_LT(oracle::max_abs_diff(g.matrix, dimer_g(l)), 1e-12) << l;
    ComplexMatrix right_sum(2), left_sum(2);
    for (std::size_t i = 0; i < 2; ++i) {
      right_sum += outer(s.rights[i], s.rights[i]);
      left_sum += outer(s.lefts[i], s.lefts[i]);
    }
    EXPECT_LT(oracle::max_abs_diff(invert(right_sum), left_sum), 1e-12);
  }
}

TEST(GMetric, HermitianGivesIdentity) {
  const GMetric g = build_g_metric(pair_left_right(oracle::random_hermitian(5, 2)));
  EXPECT_LT(oracle::max_abs_diff(g.matrix, ComplexMatrix::identity(5)), 1e-12);
}

TEST(GMetric, FourLevelUnbrokenMatchesReferenceMatrix) {
  for (double l : {0.1, 0.3, 0.55}) {
    const auto s = last_component_gauge(pair_left_right(build(ModelInstance::four_level(l))));
    const GMetric g = build_g_metric(s);
    const auto ref = closed_form(ModelInstance::four_level(l)).g_matrix(l);
    ASSERT_TRUE(ref.has_value());
    EXPECT_LT(oracle::max_abs_diff(g.matrix, *ref), 1e-10) << l;
  }
}

TEST(GMetric, FourLevelFullyBrokenMatchesReferenceMatrix) {
  for (double l : {1.7, 2.0, 2.5}) {
    const auto s = last_component_gauge(pair_left_right(build(ModelInstance::four_level(l))));
    const auto ref = closed_form(ModelInstance::four_level(l)).g_matrix(l);
    ASSERT_TRUE(ref.has_value());
    EXPECT_LT(oracle::max_abs_diff(build_g_metric(s).matrix, *ref), 1e-10) << l;
  }
}

TEST(GMetric, FourLevelMiddleRegionReferenceMatrixAtUnitCoupling) {
  // The reference middle-region metric holds in this gauge at lambda = 1 only.
  const auto s = last_component_gauge(pair_left_right(build(ModelInstance::four_level(1.0))));
  EXPECT_LT(oracle::max_abs_diff(build_g_metric(s).matrix, four_level_g_middle(1.0)), 1e-10);
  EXPECT_FALSE(closed_form(ModelInstance::four_level(1.0)).g_matrix(1.0).has_value());
}

TEST(GMetric, HftValueIsGaugeIndependent) {
  const ModelInstance m = ModelInstance::four_level(0.3);
  const BiorthoSpectrum s = pair_left_right(build(m));
  const BiorthoSpectrum t = last_component_gauge(s);
  const ComplexMatrix dh = d_dlambda(m);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_NEAR(std::abs(hft_lhs(dh, s, i) - hft_lhs(dh, t, i)), 0.0, 1e-12);
}

TEST(GExpectation, IdentityAndDimerDerivative) {
  const ModelInstance m = ModelInstance::two_level(0.6);
  const BiorthoSpectrum s = pair_left_right(build(m));
  const GMetric g = build_g_metric(s);
  EXPECT_NEAR(std::abs(g_expectation(g, ComplexMatrix::identity(2), s.rights[0]) - 1.0), 0.0, 1e-14);
  // E_+ = +0.8 is canonical index 1
  EXPECT_NEAR(std::abs(g_expectation(g, d_dlambda(m), s.rights[1]) - cplx(-0.75)), 0.0, 1e-12);
}

TEST(GExpectation, AgreesWithLeftVectorRoute) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ComplexMatrix h = oracle::random_matrix(5, seed);
    const ComplexMatrix o = oracle::random_matrix(5, seed + 1000);
    const BiorthoSpectrum s = pair_left_right(h);
    const GMetric g = build_g_metric(s);
    for (std::size_t i = 0; i < 5; ++i) {
      const cplx left_route = inner(s.lefts[i], o * s.rights[i]) / inner(s.lefts[i], s.rights[i]);
      EXPECT_LT(std::abs(g_expectation(g, o, s.rights[i]) - left_route),
                1e-9 * std::max(1.0, std::abs(left_route)))
          << "seed " << seed;
    }
  }
}

TEST(GExpectation, ZeroNormAndMismatch) {
  const GMetric g{ComplexMatrix::identity(2), GConstruction::SumOfLefts, 1.0};
  EXPECT_THROW(g_expectation(g, ComplexMatrix::identity(2), std::vector<cplx>{0.0, 0.0}), ZeroNorm);
  EXPECT_THROW(g_expectation(g, ComplexMatrix::identity(3), std::vector<cplx>{1.0, 0.0}), InvalidInput);
}

TEST(GoodObservable, DimerHamiltonianAcrossPhases) {
  const ComplexMatrix h05 = build(ModelInstance::two_level(0.5));
  EXPECT_TRUE(is_good_observable(h05, build_g_metric(pair_left_right(h05))).good);
  const ComplexMatrix h15 = build(ModelInstance::two_level(1.5));
  const auto check = is_good_observable(h15, build_g_metric(pair_left_right(h15)));
  EXPECT_FALSE(check.good);
  EXPECT_GT(check.defect_norm, 0.1);
  const GMetric any = build_g_metric(pair_left_right(oracle::random_matrix(4, 9)));
  EXPECT_TRUE(is_good_observable(ComplexMatrix::identity(4), any).good);
}

TEST(PhaseClassify, DimerAndFourLevel) {
  auto label = [](const ModelInstance& m) {
    const ComplexMatrix h = build(m);
    return phase_classify(pair_left_right(h), default_reality_tol(h));
  };
  EXPECT_EQ(label(ModelInstance::two_level(0.9)).phase, Phase::Unbroken);
  EXPECT_EQ(label(ModelInstance::two_level(1.1)).phase, Phase::Broken);
  const PhaseLabel four = label(ModelInstance::four_level(1.0));
  EXPECT_EQ(four.phase, Phase::Broken);
  EXPECT_EQ(four.complex_count, 2u);
  EXPECT_EQ(label(ModelInstance::two_level(1.0)).phase, Phase::NearEP);
  const PhaseLabel u = label(ModelInstance::two_level(0.6));
  EXPECT_LE(u.max_imag, 1e-9);
  EXPECT_NEAR(u.min_gap, 1.6, 1e-12);
}

TEST(HermitianLimit, EveryModelHasIdentityMetricAtZero) {
  for (const ModelInstance& m :
       {ModelInstance::two_level(0.0), ModelInstance::four_level(0.0), ModelInstance::lattice_pt(10, 0.0),
        ModelInstance::lattice_staggered(12, 3, 0.0)}) {
    const BiorthoSpectrum s = pair_left_right(build(m));
    const GMetric g = build_g_metric(s);
    EXPECT_LT(oracle::max_abs_diff(g.matrix, ComplexMatrix::identity(m.dim())), 1e-12);
    for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_NEAR(std::abs(inner(s.lefts[i], s.rights[i])), 1.0, 1e-12);
  }
}
