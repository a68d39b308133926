#include "nhft/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nhft/errors.hpp"
#include "nhft/hft.hpp"
#include "nhft/ladder.hpp"
#include "nhft/parallel.hpp"
#include "nhft/quadrature.hpp"

namespace nhft {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Principal axes of a real symmetric 2x2 matrix [[p, r], [r, q]].
struct Axes {
  double mu_small, mu_large;
  double ex_small, ey_small;  // unit eigenvector of mu_small
};

Axes principal_axes(double p, double q, double r) {
  const double mean = 0.5 * (p + q);
  const double rad = std::hypot(0.5 * (p - q), r);
  Axes ax{mean - rad, mean + rad, 1.0, 0.0};
  // eigenvector of mu_small: (r, mu_small - p) or (mu_small - q, r)
  double vx = r, vy = ax.mu_small - p;
  if (std::hypot(vx, vy) < std::hypot(ax.mu_small - q, r)) {
    vx = ax.mu_small - q;
    vy = r;
  }
  const double nrm = std::hypot(vx, vy);
  if (nrm > 0.0) {
    ax.ex_small = vx / nrm;
    ax.ey_small = vy / nrm;
  }
  return ax;
}

struct Integrand {
  QuadraticForm form;  // already multiplied by m/hbar: weight = exp(-(qxx x^2 + qyy y^2 + 2 qxy xy))
  OscState state;

  // L* R evaluated for real x, y, i.e. R(x, y)^2
  cplx weight(double x, double y) const {
    const OscillatorParams& p = state.params;
    const cplx expo = -(form.qxx * x * x + form.qyy * y * y + 2.0 * form.qxy * x * y);
    cplx w = std::exp(expo);
    if (state.n1 > 0 || state.n2 > 0) {
      const cplx X = p.a * x - kI * p.b * y;
      const cplx Y = kI * p.b * x + p.a * y;
      const cplx h = hermite(state.n1, p.alpha1 * X) * hermite(state.n2, p.alpha2 * Y);
      w *= h * h;
    }
    return w;
  }
};

cplx integrate_ratio(const Integrand& f, const Axes& ax, double r_major, double r_minor,
                     std::size_t n) {
  const GaussRule& rule = gauss_legendre(n);
  // major axis: eigenvector of the smallest decay rate
  const double ux = ax.ex_small, uy = ax.ey_small;
  const double vx = -uy, vy = ux;
  std::vector<cplx> num_rows(n), den_rows(n);
  std::vector<cplx> num(n), den(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = r_major * rule.nodes[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double t = r_minor * rule.nodes[j];
      const double x = s * ux + t * vx;
      const double y = s * uy + t * vy;
      const cplx w = f.weight(x, y) * rule.weights[j];
      den[j] = w;
      num[j] = w * (kI * x * y);
    }
    num_rows[i] = pairwise_sum(num) * rule.weights[i];
    den_rows[i] = pairwise_sum(den) * rule.weights[i];
  }
  const cplx den_total = pairwise_sum(den_rows);
  if (den_total == cplx{}) throw ZeroNorm("hft_lhs_quadrature: overlap integral vanishes");
  return pairwise_sum(num_rows) / den_total;
}

}  // namespace

OscillatorParams derive_params(double omega_x, double omega_y, double m, double hbar,
                               double lambda, double exclusion) {
  if (!positive_finite(omega_x) || !positive_finite(omega_y) || !positive_finite(m) ||
      !positive_finite(hbar)) {
    throw InvalidInput("derive_params: frequencies, m and hbar must be positive and finite");
  }
  if (omega_x == omega_y) throw InvalidInput("derive_params: omega_x must differ from omega_y");
  if (!std::isfinite(lambda)) throw InvalidInput("derive_params: lambda must be finite");

  OscillatorParams p;
  p.omega_x = omega_x;
  p.omega_y = omega_y;
  p.m = m;
  p.hbar = hbar;
  p.lambda = lambda;
  p.omega_plus2 = omega_y * omega_y + omega_x * omega_x;
  p.omega_minus2 = omega_y * omega_y - omega_x * omega_x;
  p.lambda_c = m * p.omega_minus2 / 2.0;
  const double lc = std::abs(p.lambda_c);
  if (std::abs(std::abs(lambda) - lc) < exclusion) {
    throw AtCriticalPoint("derive_params: lambda within the exclusion radius of lambda_c", lc);
  }
  p.broken = std::abs(lambda) > lc;
  const double r = lambda / p.lambda_c;
  p.u = std::sqrt(cplx(1.0 - r * r, 0.0));
  p.k = 1.0 / p.u;
  p.a = std::sqrt((p.k + 1.0) / 2.0);
  p.b = (r * p.k) / (2.0 * p.a);
  p.C2 = std::sqrt(0.5 * (p.omega_plus2 + p.omega_minus2 * p.u));
  if (p.broken) {
    p.C1 = std::conj(p.C2);
    p.A = p.C2.real();
    p.B = p.C2.imag();
  } else {
    p.C1 = std::sqrt(0.5 * (p.omega_plus2 - p.omega_minus2 * p.u));
  }
  p.alpha1 = std::sqrt(m * p.C1 / hbar);
  p.alpha2 = std::sqrt(m * p.C2 / hbar);
  return p;
}

cplx energy(const OscState& s) {
  const OscillatorParams& p = s.params;
  return p.hbar * ((s.n1 + 0.5) * p.C1 + (s.n2 + 0.5) * p.C2);
}

cplx dE_dlambda_closed(const OscState& s) {
  const OscillatorParams& p = s.params;
  const cplx common = p.omega_minus2 * p.lambda / (4.0 * p.lambda_c * p.lambda_c * p.u);
  const cplx dc1 = common / p.C1;
  const cplx dc2 = -common / p.C2;
  return p.hbar * ((s.n1 + 0.5) * dc1 + (s.n2 + 0.5) * dc2);
}

cplx hermite(unsigned n, cplx z) {
  cplx h0 = 1.0;
  if (n == 0) return h0;
  cplx h1 = 2.0 * z;
  for (unsigned j = 1; j < n; ++j) {
    const cplx h2 = 2.0 * z * h1 - 2.0 * static_cast<double>(j) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

QuadraticForm exponent_form(const OscillatorParams& p) {
  const cplx a2 = p.a * p.a, b2 = p.b * p.b;
  return QuadraticForm{p.C1 * a2 - p.C2 * b2, p.C2 * a2 - p.C1 * b2,
                       kI * p.a * p.b * (p.C2 - p.C1)};
}

Eigenfunctions eigenfunctions(const OscState& s) {
  const OscillatorParams p = s.params;
  const QuadraticForm q = exponent_form(p);
  const double c = p.m / (2.0 * p.hbar);
  const unsigned n1 = s.n1, n2 = s.n2;
  auto right = [p, q, c, n1, n2](double x, double y) {
    const cplx X = p.a * x - kI * p.b * y;
    const cplx Y = kI * p.b * x + p.a * y;
    const cplx expo = -c * (q.qxx * x * x + q.qyy * y * y + 2.0 * q.qxy * x * y);
    return std::exp(expo) * hermite(n1, p.alpha1 * X) * hermite(n2, p.alpha2 * Y);
  };
  auto left = [right](double x, double y) { return std::conj(right(x, y)); };
  return Eigenfunctions{right, left};
}

QuadratureResult hft_lhs_quadrature(const OscState& s, const QuadratureSpec& quad) {
  if (!(quad.cutoff > 0.0) || quad.points_per_axis < 2 || !(quad.tolerance > 0.0)) {
    throw InvalidInput("hft_lhs_quadrature: invalid quadrature spec");
  }
  const OscillatorParams& p = s.params;
  QuadraticForm q = exponent_form(p);
  const double scale = p.m / p.hbar;  // weight is R^2, so the full m/hbar
  q.qxx *= scale;
  q.qyy *= scale;
  q.qxy *= scale;
  const Axes ax = principal_axes(q.qxx.real(), q.qyy.real(), q.qxy.real());
  if (!(ax.mu_small > 0.0)) {
    throw NonDecayingIntegrand("hft_lhs_quadrature: Re of the Gaussian form is not positive definite");
  }
  const Integrand f{q, s};
  const double r_major = quad.cutoff / std::sqrt(ax.mu_small);
  const double r_minor = quad.cutoff / std::sqrt(ax.mu_large);

  QuadratureResult res;
  res.radius_major = r_major;
  res.radius_minor = r_minor;
  std::size_t n = quad.points_per_axis;
  cplx coarse = integrate_ratio(f, ax, r_major, r_minor, n);
  double best_err = std::numeric_limits<double>::infinity();
  while (2 * n <= quad.max_points_per_axis) {
    const cplx fine = integrate_ratio(f, ax, r_major, r_minor, 2 * n);
    const cplx wide = integrate_ratio(f, ax, 2.0 * r_major, 2.0 * r_minor, 2 * n);
    const double err = std::max(std::abs(fine - coarse), std::abs(wide - fine));
    if (err < best_err) {
      best_err = err;
      res.value = fine;
      res.error_estimate = err;
      res.points_per_axis = 2 * n;
    }
    if (err <= quad.tolerance * std::max(1.0, std::abs(fine))) {
      res.converged = true;
      return res;
    }
    coarse = fine;
    n *= 2;
  }
  throw NotConverged("hft_lhs_quadrature: no convergence within the point budget", res.value,
                     res.error_estimate);
}

std::vector<ContinuumSample> continuum_sweep(unsigned n1, unsigned n2,
                                             const std::vector<double>& grid,
                                             const ContinuumSweepOptions& opts) {
  // validates the frequencies once, up front
  (void)derive_params(opts.omega_x, opts.omega_y, opts.m, opts.hbar, 0.0, 0.0);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (!(grid[g] > grid[g - 1])) throw InvalidInput("continuum_sweep: grid must be ascending");
  }
  std::vector<ContinuumSample> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t g) {
    ContinuumSample& row = out[g];
    row.lambda = grid[g];
    OscState st{n1, n2, {}};
    try {
      st.params = derive_params(opts.omega_x, opts.omega_y, opts.m, opts.hbar, grid[g],
                                opts.exclusion_radius);
    } catch (const AtCriticalPoint&) {
      row.energy = row.lhs = row.rhs = cplx(kNaN, kNaN);
      row.residual = row.quad_error = kNaN;
      row.phase = Phase::NearEP;
      row.flags = flags::kNearCritical | flags::kLhsUnavailable | flags::kRhsUnavailable;
      return;
    }
    row.phase = st.params.broken ? Phase::Broken : Phase::Unbroken;
    row.energy = energy(st);
    row.rhs = dE_dlambda_closed(st);
    try {
      const QuadratureResult q = hft_lhs_quadrature(st, opts.quad);
      row.lhs = q.value;
      row.quad_error = q.error_estimate;
    } catch (const NotConverged& e) {
      row.lhs = e.best_estimate;
      row.quad_error = e.error_estimate;
      row.flags |= flags::kNonConvergence;
    } catch (const Error&) {
      row.lhs = cplx(kNaN, kNaN);
      row.quad_error = kNaN;
      row.flags |= flags::kLhsUnavailable;
    }
    row.residual = std::abs(row.lhs - row.rhs);
    if (std::isfinite(row.residual) &&
        row.residual > opts.residual_tol * std::max(1.0, std::abs(row.rhs)))
      row.flags |= flags::kResidualExceeded;
  });
  return out;
}

HftPair oscillator1d_hft(unsigned n, cplx omega, OscParameter which) {
  if (!(omega.real() > 0.0) || !std::isfinite(omega.imag())) {
    throw InvalidInput("oscillator1d_hft: Re(Omega) must be positive");
  }
  // dH/dparam = c * Omega x^2 with c = 1, i, 1 for w1, w2, Omega
  const cplx c = which == OscParameter::Omega2 ? kI : cplx{1.0, 0.0};
  const cplx x2 = diagonal_element(position_squared(omega), n);
  return HftPair{c * omega * x2, c * (n + 0.5)};
}

VirialResult virial_check(unsigned n, cplx omega) {
  if (!(omega.real() > 0.0) || !std::isfinite(omega.imag())) {
    throw InvalidInput("virial_check: Re(Omega) must be positive");
  }
  VirialResult v;
  // U + x U'/2 = Omega^2 x^2 for the harmonic potential; E_tr = <.>_G / 2
  const cplx x2 = diagonal_element(position_squared(omega), n);
  v.trapping_energy = 0.5 * omega * omega * x2;
  v.energy = (n + 0.5) * omega;
  v.ratio = v.trapping_energy / v.energy;

  if (n == 0) {
    const double radius = 8.0 / std::sqrt(omega.real());
    auto ratio_at = [&](std::size_t pts) {
      const GaussRule& rule = gauss_legendre(pts);
      std::vector<cplx> num(pts), den(pts);
      for (std::size_t i = 0; i < pts; ++i) {
        const double x = radius * rule.nodes[i];
        const cplx w = std::exp(-omega * x * x) * rule.weights[i];
        den[i] = w;
        num[i] = w * omega * omega * x * x;
      }
      return 0.5 * pairwise_sum(num) / pairwise_sum(den);
    };
    cplx prev = ratio_at(64);
    for (std::size_t pts = 128; pts <= 8192; pts *= 2) {
      const cplx next = ratio_at(pts);
      const bool done = std::abs(next - prev) <= 1e-13 * std::abs(next);
      prev = next;
      if (done) break;
    }
    v.quadrature_trapping_energy = prev;
  }
  return v;
}

}  // namespace nhft
