#include <gtest/gtest.h>

#include <cmath>

#include "nhft/errors.hpp"
#include "nhft/models.hpp"
#include "oracles.hpp"

using namespace nhft;

namespace {
const cplx I{0.0, 1.0};
}

TEST(Build, TwoLevelMatrix) {
  const ComplexMatrix expected{{0.7 * I, -1.0}, {-1.0, -0.7 * I}};
  EXPECT_EQ(build(ModelInstance::two_level(0.7)), expected);
}

TEST(Build, LatticePtAtZeroIsRealTridiagonal) {
  const ComplexMatrix h = build(ModelInstance::lattice_pt(4, 0.0));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const cplx expected = (i + 1 == j || j + 1 == i) ? cplx(-1.0) : cplx(0.0);
      EXPECT_EQ(h(i, j), expected);
    }
}

TEST(Build, LatticePtTwoSitesIsDimer) {
  for (double l : {0.0, 0.3, 1.7}) EXPECT_EQ(build(ModelInstance::lattice_pt(2, l)), build(ModelInstance::two_level(l)));
}

TEST(Build, StaggeredDiagonalPattern) {
  // sites L/2-(r-1) .. L/2+r = 3..6 carry i*lambda*(-1)^j
  const ComplexMatrix h = build(ModelInstance::lattice_staggered(8, 2, 0.3));
  std::vector<cplx> diag;
  for (std::size_t j = 0; j < 8; ++j) diag.push_back(h(j, j));
  const std::vector<cplx> expected{0.0, 0.0, -0.3 * I, 0.3 * I, -0.3 * I, 0.3 * I, 0.0, 0.0};
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(std::abs(diag[j] - expected[j]), 0.0, 1e-15) << j;
  // PT antisymmetry of the gain/loss pattern: d_j = conj(d_{L-j+1})
  for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(diag[j], std::conj(diag[7 - j]));
}

TEST(Build, FourLevelAtZeroIsOpenChain) {
  EXPECT_EQ(build(ModelInstance::four_level(0.0)), build(ModelInstance::lattice_pt(4, 0.0)));
}

TEST(Build, InvalidInstances) {
  EXPECT_THROW(build(ModelInstance::lattice_pt(5, 0.1)), InvalidInput);
  EXPECT_THROW(build(ModelInstance::lattice_pt(0, 0.1)), InvalidInput);
  EXPECT_THROW(build(ModelInstance::lattice_staggered(8, 5, 0.1)), InvalidInput);
  EXPECT_THROW(build(ModelInstance::lattice_staggered(8, 0, 0.1)), InvalidInput);
}

TEST(DDLambda, ExactPatterns) {
  EXPECT_EQ(d_dlambda(ModelInstance::two_level(0.4)), (ComplexMatrix{{I, 0.0}, {0.0, -I}}));
  const ComplexMatrix four = d_dlambda(ModelInstance::four_level(1.3));
  EXPECT_EQ(four, ComplexMatrix::diagonal(std::vector<cplx>{I, -I, I, -I}));
}

TEST(DDLambda, MatchesDifferenceQuotientForAnyStep) {
  for (const ModelInstance& m :
       {ModelInstance::two_level(0.4), ModelInstance::four_level(1.1), ModelInstance::lattice_pt(8, 0.6),
        ModelInstance::lattice_staggered(10, 2, 0.45)}) {
    for (double h : {1e-3, 0.1, 1.0}) {
      ComplexMatrix fd = build(m.at(m.lambda + h)) - build(m.at(m.lambda - h));
      fd *= 1.0 / (2.0 * h);
      EXPECT_LT(oracle::max_abs_diff(fd, d_dlambda(m)), 1e-12);
    }
  }
}

TEST(ClosedForm, CriticalPointsAndValues) {
  const ClosedFormRef two = closed_form(ModelInstance::two_level(0.6));
  ASSERT_EQ(two.critical_points.size(), 1u);
  EXPECT_DOUBLE_EQ(two.critical_points[0], 1.0);
  std::vector<cplx> e;
  for (const auto& b : two.branches) e.push_back(b.energy(0.6));
  EXPECT_LT(oracle::multiset_distance(e, {0.8, -0.8}), 1e-15);

  const ClosedFormRef four = closed_form(ModelInstance::four_level(0.0));
  ASSERT_EQ(four.critical_points.size(), 2u);
  EXPECT_NEAR(four.critical_points[0], std::sqrt((3.0 - std::sqrt(5.0)) / 2.0), 1e-15);
  EXPECT_NEAR(four.critical_points[1], std::sqrt((3.0 + std::sqrt(5.0)) / 2.0), 1e-15);
  EXPECT_LT(four.critical_points[0], four.critical_points[1]);

  e.clear();
  for (const auto& b : four.branches) e.push_back(b.energy(0.0));
  EXPECT_LT(oracle::multiset_distance(e, eigenvalues(build(ModelInstance::four_level(0.0)))), 1e-12);

  // E1 in the middle region: -i sqrt((sqrt5 - 1)/2)
  EXPECT_NEAR(std::abs(four.branches[0].energy(1.0) - cplx(0.0, -std::sqrt((std::sqrt(5.0) - 1.0) / 2.0))),
              0.0, 1e-15);
  EXPECT_EQ(four.branches[0].label, "E1");
}

TEST(ClosedForm, LatticeUnsupported) {
  EXPECT_THROW(closed_form(ModelInstance::lattice_pt(8, 0.1)), Unsupported);
  EXPECT_THROW(closed_form(ModelInstance::lattice_staggered(8, 2, 0.1)), Unsupported);
}

TEST(ClosedForm, MatchesEigensolverAcrossAllRegions) {
  for (const ModelInstance& base : {ModelInstance::two_level(0.0), ModelInstance::four_level(0.0)}) {
    const ClosedFormRef ref = closed_form(base);
    for (double l = 0.0; l <= 2.5; l += 0.05) {
      bool near_critical = false;
      for (double c : ref.critical_points) near_critical |= std::abs(l - c) < 1e-2;
      if (near_critical) continue;
      std::vector<cplx> closed;
      for (const auto& b : ref.branches) closed.push_back(b.energy(l));
      EXPECT_LT(oracle::multiset_distance(closed, eigenvalues(build(base.at(l)))), 1e-10)
          << to_string(base.kind) << " " << l;
    }
  }
}

TEST(ModelKind, NamesRoundTrip) {
  for (ModelKind k : {ModelKind::TwoLevel, ModelKind::FourLevel, ModelKind::LatticePT, ModelKind::LatticeStaggered})
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_EQ(to_string(ModelKind::LatticeStaggered), "lattice-staggered");
  EXPECT_THROW(parse_model_kind("hubbard"), InvalidInput);
}
