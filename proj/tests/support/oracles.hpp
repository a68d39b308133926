#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's eigensolver, metric or quadrature code.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "nhft/linalg.hpp"

namespace oracle {

using nhft::cplx;
using nhft::ComplexMatrix;

/// Seeded matrix with entries uniform in [-1,1] + i[-1,1].
ComplexMatrix random_matrix(std::size_t n, std::uint64_t seed);
/// Random Hermitian matrix (M + M^dagger)/2.
ComplexMatrix random_hermitian(std::size_t n, std::uint64_t seed);

/// Conjugate transpose by a plain double loop.
ComplexMatrix adjoint_loop(const ComplexMatrix& m);

/// Monic characteristic polynomial coefficients c[0..n] (c[0] = 1) of
/// det(zI - M), by the Faddeev-LeVerrier recursion.
std::vector<cplx> charpoly(const ComplexMatrix& m);

/// All roots of a monic polynomial (Durand-Kerner / Weierstrass iteration).
std::vector<cplx> polynomial_roots(const std::vector<cplx>& monic);

/// Minimal-cost matching distance between two multisets of complex numbers
/// (max over the matched pairs; brute force for n <= 8, greedy beyond).
double multiset_distance(std::vector<cplx> a, std::vector<cplx> b);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// --- continuum --------------------------------------------------------------

/// A and B of the broken-phase oscillator constants,
///   A = 1/2 sqrt(sqrt(w-^4/k1^2 + w+^4) + w+^2),
///   B = 1/2 sqrt(sqrt(w-^4/k1^2 + w+^4) - w+^2),
/// with k1 = 1/sqrt(lambda^2/lambda_c^2 - 1).
struct BrokenAB {
  double A, B;
};
BrokenAB broken_ab(double omega_x, double omega_y, double m, double lambda);

/// (H psi)(x, y) / psi(x, y) for H = -(1/2m)lap + m(wx^2 x^2 + wy^2 y^2)/2
/// + i lambda x y, hbar = 1, with a fourth-order finite-difference Laplacian.
template <class F>
cplx local_energy(const F& psi, double x, double y, double wx, double wy, double m, double lambda,
                  double h = 1e-3) {
  auto d2 = [&](double dx, double dy) {
    const cplx c = psi(x, y);
    return (-psi(x + 2 * dx, y + 2 * dy) + 16.0 * psi(x + dx, y + dy) - 30.0 * c +
            16.0 * psi(x - dx, y - dy) - psi(x - 2 * dx, y - 2 * dy)) /
           (12.0 * h * h);
  };
  const cplx lap = d2(h, 0.0) + d2(0.0, h);
  const cplx v = 0.5 * m * (wx * wx * x * x + wy * wy * y * y) + cplx(0.0, lambda * x * y);
  return (-lap / (2.0 * m) + v * psi(x, y)) / psi(x, y);
}

// --- frozen high-precision values (40-digit mpmath, rounded) ----------------

namespace frozen {
// four-level branch E1 derivative
inline constexpr double kFourLevelD1At03 = 0.5552072216012283176593637;
inline constexpr double kFourLevelD1At1ImPart = -1.272019649514068964252422;
inline constexpr double kFourLevelD1At2ImPart = -1.051462224238267212051338;

// (1,0) oscillator state, wx=1, wy=3: reference unbroken-phase derivative
struct Point {
  double lambda, re, im;
};
inline constexpr Point kOsc10Unbroken[] = {
    {0.5, 0.08252551062354343034543563, 0.0},
    {1.0, 0.1607407343216723061118842, 0.0},
    {2.0, 0.2997849262931027677975393, 0.0},
    {3.0, 0.4517335970508157939911364, 0.0},
    {3.9, 1.1709992622090051277883, 0.0},
};
// broken-phase derivative 2A' - iB'
inline constexpr Point kOsc10Broken[] = {
    {4.1, 0.1797367803442615675579624, -1.00656134995000034709694},
    {5.0, 0.1842392828674810925853188, -0.3325811349797472738845911},
    {6.0, 0.1848352743660889578104266, -0.2419525153051665330964032},
    {8.0, 0.179903671467444037993674, -0.1758476129498976502919135},
};
// A, B at lambda = 5
inline constexpr double kA5 = 2.32711751903994960996112;
inline constexpr double kB5 = 0.6445742373246469082285714;
}  // namespace frozen

}  // namespace oracle
