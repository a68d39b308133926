#include "nhft/hft.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "nhft/errors.hpp"
#include "nhft/parallel.hpp"

namespace nhft {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const cplx kNaNc{kNaN, kNaN};

void check_index(const BiorthoSpectrum& spec, std::size_t i) {
  if (i >= spec.dim()) throw InvalidInput("state index out of range");
}

// Preference list for one row of the tracking problem.
struct RowChoice {
  std::vector<std::size_t> order;  // candidates, best first
  double margin = 0.0;             // larger = more confident
  bool undecided = false;          // best two within 1%
};

RowChoice by_distance(cplx e, std::span<const cplx> next) {
  RowChoice row;
  row.order.resize(next.size());
  std::iota(row.order.begin(), row.order.end(), std::size_t{0});
  std::stable_sort(row.order.begin(), row.order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(next[a] - e) < std::abs(next[b] - e);
  });
  if (next.size() > 1) {
    const double d1 = std::abs(next[row.order[0]] - e);
    const double d2 = std::abs(next[row.order[1]] - e);
    row.undecided = d2 <= 1.01 * d1;
    row.margin = d2 > 0.0 ? (d2 - d1) / d2 : 0.0;
  } else {
    row.margin = 1.0;
  }
  return row;
}

TrackResult assign(std::vector<RowChoice> rows) {
  const std::size_t n = rows.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // confident rows pick first; undecided rows go last
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].undecided != rows[b].undecided) return !rows[a].undecided;
    return rows[a].margin > rows[b].margin;
  });
  TrackResult out;
  out.perm.assign(n, 0);
  std::vector<bool> taken(n, false);
  for (std::size_t i : order) {
    bool lost_first = false;
    for (std::size_t j : rows[i].order) {
      if (taken[j]) {
        lost_first = true;
        continue;
      }
      out.perm[i] = j;
      taken[j] = true;
      break;
    }
    if (lost_first || rows[i].undecided) out.ambiguous_states.push_back(i);
  }
  std::sort(out.ambiguous_states.begin(), out.ambiguous_states.end());
  out.ambiguous = !out.ambiguous_states.empty();
  return out;
}

double nearest_critical_distance(const std::vector<double>& critical, double lambda) {
  double d = std::numeric_limits<double>::infinity();
  for (double c : critical) d = std::min(d, std::abs(std::abs(lambda) - c));
  return d;
}

}  // namespace

// --- both sides -----------------------------------------------------------

cplx hft_lhs(const ComplexMatrix& dh, const BiorthoSpectrum& spec, std::size_t i) {
  check_index(spec, i);
  if (spec.defective[i]) throw DefectiveState("hft_lhs: state is defective");
  if (dh.dim() != spec.dim()) throw InvalidInput("hft_lhs: dimension mismatch");
  const ComplexVector dr = dh * spec.rights[i];
  return inner(spec.lefts[i], dr) / inner(spec.lefts[i], spec.rights[i]);
}

cplx hft_lhs(const ComplexMatrix& dh, const BiorthoSpectrum& spec, const GMetric& g,
             std::size_t i, double tol) {
  const cplx left_route = hft_lhs(dh, spec, i);
  const cplx metric_route = g_expectation(g, dh, spec.rights[i]);
  const double rn = norm2(spec.rights[i]);
  const double scale = std::max(1.0, std::abs(left_route)) *
                       std::max(1.0, frobenius_norm(g.matrix) * rn * rn);
  const double deviation = std::abs(left_route - metric_route);
  if (deviation > 100.0 * tol * scale) {
    throw RouteMismatch("hft_lhs: left-vector and metric routes disagree", deviation);
  }
  return left_route;
}

cplx hft_lhs(const ComplexMatrix& h, const ComplexMatrix& dh, std::size_t i, double tol) {
  BiorthoOptions opts;
  opts.tol = tol;
  const BiorthoSpectrum spec = pair_left_right(h, opts);
  const GMetric g = build_g_metric(spec, std::max(tol, 1e-10));
  return hft_lhs(dh, spec, g, i, tol);
}

cplx hft_rhs_closed(const ModelInstance& model, std::size_t branch, double lambda,
                    double exclusion) {
  const ClosedFormRef ref = closed_form(model);
  if (branch >= ref.branches.size()) throw InvalidInput("hft_rhs_closed: no such branch");
  for (double c : ref.critical_points) {
    if (std::abs(std::abs(lambda) - c) < exclusion) {
      throw AtCriticalPoint("hft_rhs_closed: lambda inside the exclusion radius", c);
    }
  }
  return ref.branches[branch].derivative(lambda);
}

// --- tracking -------------------------------------------------------------

TrackResult track_states(const BiorthoSpectrum& prev, const BiorthoSpectrum& next) {
  const std::size_t n = prev.dim();
  if (next.dim() != n) throw InvalidInput("track_states: dimension mismatch");
  std::vector<double> next_norm(n);
  for (std::size_t j = 0; j < n; ++j) next_norm[j] = norm2(next.rights[j]);

  std::vector<RowChoice> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (prev.defective[i]) {
      rows[i] = by_distance(prev.eigenvalues[i], next.eigenvalues);
      continue;
    }
    const double rn = norm2(prev.rights[i]);
    std::vector<double> score(n);
    for (std::size_t j = 0; j < n; ++j) {
      score[j] = std::abs(inner(prev.lefts[i], next.rights[j])) * rn / next_norm[j];
    }
    RowChoice row;
    row.order.resize(n);
    std::iota(row.order.begin(), row.order.end(), std::size_t{0});
    std::stable_sort(row.order.begin(), row.order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    if (n > 1 && score[row.order[1]] >= 0.99 * score[row.order[0]]) {
      rows[i] = by_distance(prev.eigenvalues[i], next.eigenvalues);
      continue;
    }
    // overlap-decided rows always outrank distance-decided ones
    row.margin = 1.0 + (n > 1 ? 1.0 - score[row.order[1]] / score[row.order[0]] : 1.0);
    rows[i] = std::move(row);
  }
  return assign(std::move(rows));
}

TrackResult track_by_proximity(std::span<const cplx> prev, std::span<const cplx> next) {
  if (prev.size() != next.size()) throw InvalidInput("track_by_proximity: size mismatch");
  std::vector<RowChoice> rows;
  rows.reserve(prev.size());
  for (const cplx& e : prev) rows.push_back(by_distance(e, next));
  return assign(std::move(rows));
}

// --- finite differences -------------------------------------------------------

std::vector<std::optional<FdResult>> hft_rhs_fd_all(const ModelInstance& model,
                                                    const BiorthoSpectrum& spec, double lambda,
                                                    double h, const BiorthoOptions& opts) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("hft_rhs_fd: step must be positive");
  const std::size_t n = spec.dim();
  const double offsets[4] = {-2.0 * h, -h, h, 2.0 * h};
  std::vector<std::array<cplx, 4>> e(n);
  std::vector<bool> ambiguous(n, false);
  for (int k = 0; k < 4; ++k) {
    const BiorthoSpectrum shifted = pair_left_right(build(model.at(lambda + offsets[k])), opts);
    const TrackResult tr = track_states(spec, shifted);
    for (std::size_t s : tr.ambiguous_states) ambiguous[s] = true;
    for (std::size_t i = 0; i < n; ++i) e[i][k] = shifted.eigenvalues[tr.perm[i]];
  }
  std::vector<std::optional<FdResult>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ambiguous[i]) continue;
    const cplx d1 = (e[i][2] - e[i][1]) / (2.0 * h);
    const cplx d2 = (e[i][3] - e[i][0]) / (4.0 * h);
    out[i] = FdResult{(4.0 * d1 - d2) / 3.0, std::abs(d1 - d2)};
  }
  return out;
}

FdResult hft_rhs_fd(const ModelInstance& model, std::size_t i, double lambda, double h,
                    const FdOptions& opts) {
  const ModelInstance at = model.at(lambda);
  const BiorthoSpectrum spec = pair_left_right(build(at), opts.biortho);
  check_index(spec, i);
  const auto all = hft_rhs_fd_all(at, spec, lambda, h, opts.biortho);
  if (!all[i]) throw TrackingAmbiguous("hft_rhs_fd: branch tracking is ambiguous at lambda ± h");
  if (all[i]->error_estimate > opts.accuracy) {
    throw StepTooLarge("hft_rhs_fd: Richardson estimate exceeds requested accuracy",
                       all[i]->error_estimate);
  }
  return *all[i];
}

// --- flags --------------------------------------------------------------------

namespace {
constexpr std::pair<std::uint32_t, std::string_view> kFlagNames[] = {
    {flags::kDefective, "defective"},
    {flags::kNearCritical, "near-critical"},
    {flags::kTrackingAmbiguous, "tracking-ambiguous"},
    {flags::kRouteMismatch, "route-mismatch"},
    {flags::kResidualExceeded, "residual-exceeded"},
    {flags::kRhsUnavailable, "rhs-unavailable"},
    {flags::kNonConvergence, "non-convergence"},
    {flags::kStepTooLarge, "step-too-large"},
    {flags::kLhsUnavailable, "lhs-unavailable"},
};
}  // namespace

std::string flags_to_string(std::uint32_t f) {
  std::string out;
  for (const auto& [bit, name] : kFlagNames) {
    if ((f & bit) == 0) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

std::uint32_t flags_from_string(std::string_view s) {
  std::uint32_t f = 0;
  while (!s.empty()) {
    const auto bar = s.find('|');
    const std::string_view token = s.substr(0, bar);
    bool known = false;
    for (const auto& [bit, name] : kFlagNames) {
      if (token == name) {
        f |= bit;
        known = true;
      }
    }
    if (!known) throw InvalidInput("unknown flag '" + std::string(token) + "'");
    if (bar == std::string_view::npos) break;
    s.remove_prefix(bar + 1);
  }
  return f;
}

// --- sweep ----------------------------------------------------------------

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n == 0) throw InvalidInput("linear_grid: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  g.back() = hi;
  return g;
}

namespace {

struct GridPoint {
  std::optional<BiorthoSpectrum> spec;
  double reality_tol = 0.0;
  PhaseLabel phase;
};

// Bisects [a, b] for the point where the state tracked from ea turns complex.
double refine_transition(const ModelInstance& model, double a, double b, cplx ea,
                         double reality_tol, std::map<double, ComplexVector>& memo) {
  for (int it = 0; it < 60 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    auto found = memo.find(m);
    if (found == memo.end()) found = memo.emplace(m, eigenvalues(build(model.at(m)))).first;
    const ComplexVector& ev = found->second;
    std::size_t best = 0;
    for (std::size_t j = 1; j < ev.size(); ++j) {
      if (std::abs(ev[j] - ea) < std::abs(ev[best] - ea)) best = j;
    }
    if (std::abs(ev[best].imag()) > reality_tol) {
      b = m;
    } else {
      a = m;
      ea = ev[best];
    }
  }
  return b;
}

}  // namespace

SweepResult sweep(const ModelInstance& model, const std::vector<double>& grid,
                  const SweepOptions& opts) {
  model.validate();
  if (grid.empty()) throw InvalidInput("sweep: empty grid");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(grid[g])) throw InvalidInput("sweep: non-finite grid value");
    if (g > 0 && !(grid[g] > grid[g - 1])) throw InvalidInput("sweep: grid must be ascending");
  }
  const std::size_t n = model.dim();
  const std::size_t ng = grid.size();
  const bool closed = has_closed_form(model.kind) && !opts.force_fd;
  std::optional<ClosedFormRef> cf;
  if (has_closed_form(model.kind)) cf = closed_form(model);
  const std::vector<double> critical = cf ? cf->critical_points : std::vector<double>{};

  // 1. spectra, in parallel
  std::vector<GridPoint> points(ng);
  parallel_for(ng, [&](std::size_t g) {
    const ComplexMatrix h = build(model.at(grid[g]));
    GridPoint& p = points[g];
    p.reality_tol = opts.reality_tol > 0.0 ? opts.reality_tol : default_reality_tol(h);
    try {
      p.spec = pair_left_right(h, opts.biortho);
      p.phase = phase_classify(*p.spec, p.reality_tol, opts.ep_tol);
    } catch (const Error&) {
      p.spec.reset();
    }
  });

  // 2. sequential tracking
  SweepResult out;
  out.model = model;
  out.grid = grid;
  out.branch.assign(n, std::vector<std::size_t>(ng, 0));
  for (std::size_t s = 0; s < n; ++s) out.branch[s][0] = s;
  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  out.tracking_permutations.assign(ng > 0 ? ng - 1 : 0, identity);
  std::vector<std::vector<bool>> step_ambiguous(ng, std::vector<bool>(n, false));
  std::optional<std::size_t> last_good = points[0].spec ? std::optional<std::size_t>(0) : std::nullopt;
  for (std::size_t g = 1; g < ng; ++g) {
    for (std::size_t s = 0; s < n; ++s) out.branch[s][g] = out.branch[s][g - 1];
    if (!points[g].spec) continue;
    if (last_good) {
      const TrackResult tr = track_states(*points[*last_good].spec, *points[g].spec);
      if (*last_good == g - 1) out.tracking_permutations[g - 1] = tr.perm;
      std::vector<bool> amb(n, false);
      for (std::size_t i : tr.ambiguous_states) amb[i] = true;
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t from = out.branch[s][*last_good];
        out.branch[s][g] = tr.perm[from];
        step_ambiguous[g][s] = amb[from];
      }
    }
    last_good = g;
  }

  // 3. transitions
  out.transitions.assign(n, std::nullopt);
  std::map<double, ComplexVector> memo;
  for (std::size_t s = 0; s < n; ++s) {
    std::optional<std::size_t> prev;
    for (std::size_t g = 0; g < ng; ++g) {
      if (!points[g].spec) continue;
      const cplx e = points[g].spec->eigenvalues[out.branch[s][g]];
      const bool complex = std::abs(e.imag()) > points[g].reality_tol;
      if (complex && prev) {
        const cplx ea = points[*prev].spec->eigenvalues[out.branch[s][*prev]];
        out.transitions[s] =
            opts.refine_transitions
                ? refine_transition(model, grid[*prev], grid[g], ea, points[g].reality_tol, memo)
                : grid[g];
        break;
      }
      if (complex) break;  // complex from the start: no transition inside the grid
      prev = g;
    }
  }
  std::vector<double> all_transitions;
  for (const auto& t : out.transitions)
    if (t) all_transitions.push_back(*t);

  // 4. samples, in parallel over grid points
  out.samples.assign(ng * n, HftSample{});
  const ComplexMatrix dh = d_dlambda(model);
  parallel_for(ng, [&](std::size_t g) {
    const double lambda = grid[g];
    const GridPoint& p = points[g];
    HftSample* row = &out.samples[g * n];
    if (!p.spec) {
      for (std::size_t s = 0; s < n; ++s) {
        row[s] = HftSample{};
        row[s].lambda = lambda;
        row[s].state = s;
        row[s].energy = row[s].lhs = row[s].rhs = kNaNc;
        row[s].residual = row[s].imag_E = kNaN;
        row[s].flags = flags::kNonConvergence | flags::kLhsUnavailable | flags::kRhsUnavailable;
      }
      return;
    }
    const BiorthoSpectrum& spec = *p.spec;

    std::optional<GMetric> gm;
    try {
      gm = build_g_metric(spec, std::max(opts.biortho.tol, 1e-10));
    } catch (const Error&) {
      gm.reset();
    }

    std::vector<std::optional<FdResult>> fd;
    bool fd_failed = false;
    if (!closed) {
      double dist = std::numeric_limits<double>::infinity();
      for (double t : all_transitions) dist = std::min(dist, std::abs(lambda - t));
      double h = std::clamp(1e-4 * dist, 1e-6, 1e-4);
      try {
        fd = hft_rhs_fd_all(model.at(lambda), spec, lambda, h, opts.biortho);
        // shrink the step while some estimate is too coarse; keep the best per state
        auto coarse = [&] {
          for (const auto& r : fd)
            if (r && r->error_estimate > opts.residual_tol) return true;
          return false;
        };
        while (coarse() && h > 1e-6) {
          h = std::max(h / 4.0, 1e-6);
          const auto finer = hft_rhs_fd_all(model.at(lambda), spec, lambda, h, opts.biortho);
          for (std::size_t i = 0; i < n; ++i)
            if (finer[i] && (!fd[i] || finer[i]->error_estimate < fd[i]->error_estimate)) fd[i] = finer[i];
        }
      } catch (const Error&) {
        fd_failed = true;
      }
    }

    for (std::size_t s = 0; s < n; ++s) {
      HftSample& smp = row[s];
      const std::size_t idx = out.branch[s][g];
      smp.lambda = lambda;
      smp.state = s;
      smp.energy = spec.eigenvalues[idx];
      smp.imag_E = smp.energy.imag();
      smp.phase = p.phase;
      if (step_ambiguous[g][s]) smp.flags |= flags::kTrackingAmbiguous;

      bool near = nearest_critical_distance(critical, lambda) < opts.exclusion_radius;
      if (out.transitions[s] && std::abs(lambda - *out.transitions[s]) < opts.exclusion_radius)
        near = true;
      if (near) smp.flags |= flags::kNearCritical;

      if (spec.defective[idx]) {
        smp.flags |= flags::kDefective | flags::kLhsUnavailable;
        smp.lhs = kNaNc;
      } else if (gm) {
        try {
          smp.lhs = hft_lhs(dh, spec, *gm, idx, opts.biortho.tol);
        } catch (const RouteMismatch&) {
          smp.flags |= flags::kRouteMismatch;
          smp.lhs = hft_lhs(dh, spec, idx);
        } catch (const ZeroNorm&) {
          smp.flags |= flags::kRouteMismatch;
          smp.lhs = hft_lhs(dh, spec, idx);
        }
      } else {
        smp.flags |= flags::kRouteMismatch;
        smp.lhs = hft_lhs(dh, spec, idx);
      }

      if (closed) {
        if (near) {
          smp.rhs = kNaNc;
          smp.flags |= flags::kRhsUnavailable;
        } else {
          const std::size_t b = cf->nearest_branch(smp.energy, lambda);
          smp.rhs = cf->branches[b].derivative(lambda);
        }
      } else if (fd_failed || !fd[idx]) {
        smp.rhs = kNaNc;
        smp.flags |= flags::kRhsUnavailable;
        if (!fd_failed) smp.flags |= flags::kTrackingAmbiguous;
      } else {
        smp.rhs = fd[idx]->value;
        smp.rhs_error = fd[idx]->error_estimate;
        if (smp.rhs_error > opts.residual_tol) smp.flags |= flags::kStepTooLarge;
      }

      smp.residual = std::abs(smp.lhs - smp.rhs);
      if (std::isfinite(smp.residual) && smp.residual > opts.residual_tol)
        smp.flags |= flags::kResidualExceeded;
    }
  });
  return out;
}

// --- divergence -------------------------------------------------------------

const char* to_string(DivergenceStatus s) noexcept {
  switch (s) {
    case DivergenceStatus::Divergent: return "divergent";
    case DivergenceStatus::NoDivergence: return "no-divergence";
    case DivergenceStatus::InsufficientPoints: return "insufficient-points";
  }
  return "unknown";
}

std::vector<DivergenceEntry> divergence_report(const SweepResult& sw,
                                               const DivergenceOptions& opts) {
  if (opts.window < 2) throw InvalidInput("divergence_report: window must be at least 2");
  if (sw.grid.size() < opts.window) {
    throw InsufficientPoints("divergence_report: grid has fewer points than the fit window");
  }
  const std::size_t n = sw.dim();
  const std::size_t ng = sw.grid.size();
  std::optional<ClosedFormRef> cf;
  if (has_closed_form(sw.model.kind)) cf = closed_form(sw.model);

  std::vector<DivergenceEntry> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    DivergenceEntry& d = out[s];
    d.state = s;
    for (std::size_t g = 0; g < ng; ++g) {
      const double f = sw.at(g, s).f();
      if (std::isfinite(f)) d.max_abs_f = std::max(d.max_abs_f, f);
    }

    d.lambda_star = sw.transitions[s];
    if (!d.lambda_star && cf) {
      // closed-form branch that turns complex just past the end of the grid
      const HftSample& last = sw.at(ng - 1, s);
      if (std::isfinite(last.energy.real())) {
        const auto& br = cf->branches[cf->nearest_branch(last.energy, last.lambda)];
        for (double c : cf->critical_points) {
          if (c <= sw.grid.back()) continue;
          const double delta = 1e-6 * std::max(1.0, c);
          if (br.energy(c - delta).imag() == 0.0 && br.energy(c + delta).imag() != 0.0) {
            d.lambda_star = c;
            break;
          }
        }
      }
    }
    if (!d.lambda_star) {
      d.status = DivergenceStatus::NoDivergence;
      continue;
    }

    std::vector<double> xs, ys;
    for (std::size_t g = ng; g-- > 0;) {
      const HftSample& smp = sw.at(g, s);
      if (smp.lambda >= *d.lambda_star) continue;
      if (smp.flags & (flags::kNearCritical | flags::kDefective | flags::kLhsUnavailable)) continue;
      const double f = smp.f();
      if (!(f > 0.0) || !std::isfinite(f)) continue;
      xs.push_back(std::log(*d.lambda_star - smp.lambda));
      ys.push_back(std::log(f));
      if (xs.size() == opts.window) break;
    }
    d.points_used = xs.size();
    if (xs.size() < opts.window) {
      d.status = DivergenceStatus::InsufficientPoints;
      continue;
    }
    const double m = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    const double intercept = my - slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double r = ys[k] - (intercept + slope * xs[k]);
      ss += r * r;
    }
    d.exponent = -slope;
    d.fit_residual = std::sqrt(ss / m);
    d.status = d.exponent > opts.min_exponent ? DivergenceStatus::Divergent
                                              : DivergenceStatus::NoDivergence;
  }
  return out;
}

}  // namespace nhft
