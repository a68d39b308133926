#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nhft/linalg.hpp"

namespace nhft {

/// Paired right/left eigenvectors with <L_i|R_j> = delta_ij.
///
/// Normalization is split symmetrically, ||L_i|| = ||R_i|| = 1/sqrt|s_i| with
/// s_i = <L^_i|R^_i> the overlap of the unit vectors (kept in
/// self_overlaps). Defective states keep their unit vectors and are excluded
/// from every biorthogonal identity.
struct BiorthoSpectrum {
  ComplexVector eigenvalues;
  std::vector<ComplexVector> rights;
  std::vector<ComplexVector> lefts;
  ComplexVector self_overlaps;
  std::vector<bool> defective;

  std::size_t dim() const noexcept { return eigenvalues.size(); }
  bool any_defective() const noexcept;
  double min_self_overlap() const noexcept;
};

struct BiorthoOptions {
  double tol = kDefaultTol;
  /// |<L^|R^>| below this marks the state defective.
  double defect_threshold = 1e-6;
  /// Second-best conjugate match within this factor of the best is ambiguous.
  double ambiguity_ratio = 10.0;
};

/// Eigendecompose H and H^dagger, pair lefts to rights by conjugate
/// eigenvalue distance, then normalize.
BiorthoSpectrum pair_left_right(const ComplexMatrix& h, const BiorthoOptions& opts = {});

/// R_i -> c_i R_i and L_i -> L_i / conj(c_i); <L_i|R_j> is unchanged.
BiorthoSpectrum regauge_rights(BiorthoSpectrum spec, std::span<const cplx> factors);

enum class GConstruction { SumOfLefts, InverseSumOfRights };

struct GMetric {
  ComplexMatrix matrix;
  GConstruction construction = GConstruction::SumOfLefts;
  double condition_estimate = 1.0;
};

/// G = sum_i |L_i><L_i|, cross-checked against [sum_i |R_i><R_i|]^-1 and then
/// symmetrized to (G + G^dagger)/2.
GMetric build_g_metric(const BiorthoSpectrum& spec, double tol = kDefaultTol);

/// <R|G O|R> / <R|G|R>. ZeroNorm when |<R|G|R>| is below zero_tol.
cplx g_expectation(const GMetric& g, const ComplexMatrix& o, std::span<const cplx> r,
                   double zero_tol = 1e-14);

struct GoodObservableCheck {
  bool good = false;
  double defect_norm = 0.0;  // ||O^dagger G - G O||_F
};

/// O^dagger G = G O within tol * ||G||_F * ||O||_F.
GoodObservableCheck is_good_observable(const ComplexMatrix& o, const GMetric& g,
                                       double tol = 1e-9);

enum class Phase { Unbroken, Broken, NearEP };

struct PhaseLabel {
  Phase phase = Phase::Unbroken;
  double max_imag = 0.0;
  double min_gap = 0.0;
  std::size_t complex_count = 0;
};

/// NearEP when the smallest self-overlap is below ep_tol, otherwise Unbroken
/// when every |Im E| <= reality_tol, otherwise Broken.
PhaseLabel phase_classify(const BiorthoSpectrum& spec, double reality_tol, double ep_tol = 1e-6);

/// 1e-9 * ||H||_F (floored at 1e-9).
double default_reality_tol(const ComplexMatrix& h) noexcept;

const char* to_string(Phase p) noexcept;

/// Biorthogonality and completeness errors of non-defective states.
double biorthogonality_error(const BiorthoSpectrum& spec) noexcept;
double completeness_error(const BiorthoSpectrum& spec);

}  // namespace nhft
