#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nhft/biortho.hpp"
#include "nhft/linalg.hpp"
#include "nhft/models.hpp"

namespace nhft {

// --- both sides of the identity -------------------------------------------

/// <L_i|dH|R_i> / <L_i|R_i> (left-vector route only).
cplx hft_lhs(const ComplexMatrix& dh, const BiorthoSpectrum& spec, std::size_t i);

/// Left-vector route cross-checked against the metric route
/// <R_i|G dH|R_i> / <R_i|G|R_i>. RouteMismatch when they differ by more than
/// 100·tol scaled by max(1, |lhs|)·max(1, ||G||_F ||R_i||^2).
/// DefectiveState for a flagged state.
cplx hft_lhs(const ComplexMatrix& dh, const BiorthoSpectrum& spec, const GMetric& g,
             std::size_t i, double tol = kDefaultTol);

/// Convenience: builds the spectrum and metric of h itself.
cplx hft_lhs(const ComplexMatrix& h, const ComplexMatrix& dh, std::size_t i,
             double tol = kDefaultTol);

/// Analytic dE/dlambda of the closed-form branch `branch` (index into
/// closed_form(model).branches). AtCriticalPoint within `exclusion` of a
/// critical coupling; Unsupported for lattice models.
cplx hft_rhs_closed(const ModelInstance& model, std::size_t branch, double lambda,
                    double exclusion = 1e-4);

// --- branch tracking ------------------------------------------------------

struct TrackResult {
  /// perm[i] is the index in `next` continuing state i of `prev`.
  std::vector<std::size_t> perm;
  bool ambiguous = false;
  std::vector<std::size_t> ambiguous_states;  // indices into prev
};

/// Matches states across a small step in lambda. Scores are
/// |<L_i^prev|R_j^next>| ||R_i^prev|| / ||R_j^next||, which is ~1 on the
/// continuing branch. Rows whose best two scores are within 1% fall back to
/// eigenvalue proximity; rows still undecided there (second distance within
/// 1% of the best) or that lose their first choice are reported ambiguous.
TrackResult track_states(const BiorthoSpectrum& prev, const BiorthoSpectrum& next);

/// Eigenvalue-only tracking by proximity, same ambiguity rule.
TrackResult track_by_proximity(std::span<const cplx> prev, std::span<const cplx> next);

// --- finite-difference right-hand side -------------------------------------

struct FdResult {
  cplx value;               // Richardson-extrapolated central difference
  double error_estimate;    // |D(h) - D(2h)|
};

struct FdOptions {
  /// StepTooLarge when the error estimate exceeds this.
  double accuracy = 1e-6;
  BiorthoOptions biortho{};
};

/// dE_i/dlambda on the branch tracked from the canonical state i at lambda,
/// from spectra at lambda ± h and lambda ± 2h. TrackingAmbiguous if any of
/// those steps is ambiguous for state i.
FdResult hft_rhs_fd(const ModelInstance& model, std::size_t i, double lambda, double h,
                    const FdOptions& opts = {});

/// Same for every state at once; `spec` is the spectrum at lambda. Entries
/// for states whose tracking was ambiguous are nullopt.
std::vector<std::optional<FdResult>> hft_rhs_fd_all(const ModelInstance& model,
                                                    const BiorthoSpectrum& spec, double lambda,
                                                    double h, const BiorthoOptions& opts = {});

// --- sweeps -----------------------------------------------------------------

namespace flags {
inline constexpr std::uint32_t kDefective = 1u << 0;
inline constexpr std::uint32_t kNearCritical = 1u << 1;
inline constexpr std::uint32_t kTrackingAmbiguous = 1u << 2;
inline constexpr std::uint32_t kRouteMismatch = 1u << 3;
inline constexpr std::uint32_t kResidualExceeded = 1u << 4;
inline constexpr std::uint32_t kRhsUnavailable = 1u << 5;
inline constexpr std::uint32_t kNonConvergence = 1u << 6;
inline constexpr std::uint32_t kStepTooLarge = 1u << 7;
inline constexpr std::uint32_t kLhsUnavailable = 1u << 8;
}  // namespace flags

/// "defective|near-critical|..." ; empty string for no flags.
std::string flags_to_string(std::uint32_t f);
std::uint32_t flags_from_string(std::string_view s);

enum class RhsSource { ClosedForm, FiniteDifference };

struct HftSample {
  double lambda = 0.0;
  std::size_t state = 0;  // canonical index at the first grid point
  cplx energy{};
  cplx lhs{};
  cplx rhs{};
  double residual = 0.0;        // |lhs - rhs|, NaN if either side is missing
  double rhs_error = 0.0;       // finite-difference error estimate (0 for closed form)
  PhaseLabel phase;             // of the whole spectrum at lambda
  double imag_E = 0.0;
  std::uint32_t flags = 0;

  /// f(lambda) as plotted: |lhs|.
  double f() const noexcept { return std::abs(lhs); }
};

struct SweepOptions {
  BiorthoOptions biortho{};
  /// 0 selects default_reality_tol(H) at each point.
  double reality_tol = 0.0;
  double ep_tol = 1e-6;
  /// Samples within this distance of a critical coupling or of the state's
  /// detected transition are flagged near-critical. Closed-form right-hand
  /// sides are not evaluated there.
  double exclusion_radius = 1e-4;
  /// Residuals above this are flagged residual-exceeded.
  double residual_tol = 1e-6;
  /// Force finite differences even when a closed form exists.
  bool force_fd = false;
  /// Refine transitions by bisection between grid points.
  bool refine_transitions = true;
};

struct SweepResult {
  ModelInstance model;
  std::vector<double> grid;
  /// grid-major, state ascending: samples[g * dim + s]
  std::vector<HftSample> samples;
  /// tracking_permutations[g] maps canonical indices at grid[g] to grid[g+1].
  std::vector<std::vector<std::size_t>> tracking_permutations;
  /// branch[s][g]: canonical index at grid[g] of tracked state s.
  std::vector<std::vector<std::size_t>> branch;
  /// First lambda where tracked |Im E| exceeds the reality tolerance.
  std::vector<std::optional<double>> transitions;

  std::size_t dim() const noexcept { return model.dim(); }
  const HftSample& at(std::size_t g, std::size_t s) const { return samples[g * dim() + s]; }
};

/// Ascending grid; eigendecompositions run in parallel, tracking is a
/// deterministic sequential pass. Numerical trouble is recorded in sample
/// flags and never aborts the sweep.
SweepResult sweep(const ModelInstance& model, const std::vector<double>& grid,
                  const SweepOptions& opts = {});

/// n evenly spaced points in [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

// --- divergence diagnostics -------------------------------------------------

enum class DivergenceStatus { Divergent, NoDivergence, InsufficientPoints };
const char* to_string(DivergenceStatus s) noexcept;

struct DivergenceEntry {
  std::size_t state = 0;
  DivergenceStatus status = DivergenceStatus::NoDivergence;
  std::optional<double> lambda_star;
  double exponent = 0.0;       // p in |f| ~ C |lambda - lambda*|^-p
  double fit_residual = 0.0;   // rms of the log-log fit
  double max_abs_f = 0.0;
  std::size_t points_used = 0;
};

struct DivergenceOptions {
  std::size_t window = 8;
  /// Fitted exponents at or below this are reported as no divergence.
  double min_exponent = 0.1;
};

/// Fits log|f| against log|lambda - lambda*| on the last `window` unflagged
/// samples before lambda*. lambda* is the state's detected transition, or for
/// closed-form models the critical coupling at which its branch turns complex
/// if the grid stops short of it. InsufficientPoints if the grid itself is
/// shorter than the window.
std::vector<DivergenceEntry> divergence_report(const SweepResult& sweep,
                                               const DivergenceOptions& opts = {});

}  // namespace nhft
