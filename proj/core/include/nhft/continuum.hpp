#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nhft/biortho.hpp"
#include "nhft/linalg.hpp"

namespace nhft {

// --- 2-d oscillator with i*lambda*x*y coupling --------------------------------
//
// H = (px^2 + py^2)/2m + m(wx^2 x^2 + wy^2 y^2)/2 + i lambda x y.
// Rotated coordinates X = a x - i b y, Y = i b x + a y with
// a = sqrt((k+1)/2), 2ab = lambda k / lambda_c diagonalize it into two
// oscillators of frequencies C1, C2.

struct OscillatorParams {
  double omega_x = 1.0;
  double omega_y = 3.0;
  double m = 1.0;
  double hbar = 1.0;
  double lambda = 0.0;

  // derived
  double omega_plus2 = 0.0;   // wy^2 + wx^2
  double omega_minus2 = 0.0;  // wy^2 - wx^2
  double lambda_c = 0.0;      // m * omega_minus2 / 2
  bool broken = false;        // |lambda| > |lambda_c|
  cplx u{};                   // 1/k = sqrt(1 - lambda^2/lambda_c^2), principal branch
  cplx k{};
  cplx a{}, b{};
  cplx C1{}, C2{};
  cplx alpha1{}, alpha2{};    // sqrt(m C / hbar)
  /// Broken phase only: C1 = A - iB, C2 = A + iB.
  double A = 0.0, B = 0.0;
};

/// AtCriticalPoint within `exclusion` of |lambda_c|; InvalidInput for
/// non-positive or equal frequencies, m or hbar.
OscillatorParams derive_params(double omega_x, double omega_y, double m, double hbar,
                               double lambda, double exclusion = 1e-3);

struct OscState {
  unsigned n1 = 0;
  unsigned n2 = 0;
  OscillatorParams params;
};

cplx energy(const OscState& s);
cplx dE_dlambda_closed(const OscState& s);

/// Physicists' Hermite polynomial by forward recurrence.
cplx hermite(unsigned n, cplx z);

struct Eigenfunctions {
  std::function<cplx(double, double)> right;
  std::function<cplx(double, double)> left;
};

/// Unnormalized right and left eigenfunctions. For real (x, y) the left one
/// is the pointwise conjugate of the right one, which is what the starred
/// constants amount to in both phases.
Eigenfunctions eigenfunctions(const OscState& s);

/// Coefficients of the exponent of R:  R ~ exp(-(m/2hbar)(qxx x^2 + qyy y^2 + 2 qxy x y)).
struct QuadraticForm {
  cplx qxx, qyy, qxy;
};
QuadraticForm exponent_form(const OscillatorParams& p);

struct QuadratureSpec {
  /// Box half-width along each principal axis of Re(form) is
  /// cutoff / sqrt(eigenvalue).
  double cutoff = 8.0;
  std::size_t points_per_axis = 64;
  std::size_t max_points_per_axis = 1024;
  double tolerance = 1e-10;  // relative change under refinement
};

struct QuadratureResult {
  cplx value{};
  double error_estimate = 0.0;
  std::size_t points_per_axis = 0;
  double radius_major = 0.0;
  double radius_minor = 0.0;
  bool converged = false;
};

/// int L* (i x y) R / int L* R on a tensor Gauss-Legendre box aligned with the
/// principal axes of the decay form. Converged when doubling the points and
/// doubling the box both change the ratio by less than the tolerance.
/// NonDecayingIntegrand if Re(form) is not positive definite; NotConverged
/// carries the best estimate.
QuadratureResult hft_lhs_quadrature(const OscState& s, const QuadratureSpec& quad = {});

struct ContinuumSample {
  double lambda = 0.0;
  cplx energy{};
  cplx lhs{};
  cplx rhs{};
  double residual = 0.0;
  double quad_error = 0.0;
  Phase phase = Phase::Unbroken;
  std::uint32_t flags = 0;  // same bits as hft flags
};

struct ContinuumSweepOptions {
  double omega_x = 1.0;
  double omega_y = 3.0;
  double m = 1.0;
  double hbar = 1.0;
  double exclusion_radius = 1e-3;
  double residual_tol = 1e-6;
  QuadratureSpec quad{};
};

/// One row per grid point; points within the exclusion radius of lambda_c are
/// flagged near-critical and left as NaN.
std::vector<ContinuumSample> continuum_sweep(unsigned n1, unsigned n2,
                                             const std::vector<double>& grid,
                                             const ContinuumSweepOptions& opts = {});

// --- 1-d complex-frequency oscillator -----------------------------------------

enum class OscParameter { Omega1, Omega2, Omega };

struct HftPair {
  cplx lhs;
  cplx rhs;
};

/// H = p^2/2 + Omega^2 x^2/2 with Omega = w1 + i w2, E_n = (n + 1/2) Omega.
/// lhs is <n̄|dH/dparam|n> from ladder algebra; rhs is dE_n/dparam.
HftPair oscillator1d_hft(unsigned n, cplx omega, OscParameter which);

struct VirialResult {
  cplx trapping_energy{};  // (1/2)<Omega^2 x^2>_G
  cplx energy{};
  cplx ratio{};
  /// Ground state only: trapping energy from 1-d Gauss-Legendre quadrature.
  std::optional<cplx> quadrature_trapping_energy;
};

VirialResult virial_check(unsigned n, cplx omega);

}  // namespace nhft
