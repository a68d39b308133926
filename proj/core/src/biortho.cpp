#include "nhft/biortho.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "nhft/errors.hpp"

namespace nhft {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct Edge {
  std::size_t right;
  std::size_t left;
  double distance;
  double overlap;
};

// Assigns lefts to rights inside one cluster of mutually close eigenvalues.
void resolve_cluster(const std::vector<Edge>& edges, double defect_threshold,
                     std::vector<std::optional<std::size_t>>& match,
                     std::vector<bool>& left_taken, std::vector<bool>& defective) {
  double max_overlap = 0.0;
  for (const auto& e : edges) max_overlap = std::max(max_overlap, e.overlap);

  std::vector<Edge> order = edges;
  if (max_overlap < defect_threshold) {
    // coalesced eigenvectors: no overlap information, fall back to distance
    std::stable_sort(order.begin(), order.end(),
                     [](const Edge& a, const Edge& b) { return a.distance < b.distance; });
    for (const auto& e : edges) defective[e.right] = true;
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [](const Edge& a, const Edge& b) { return a.overlap > b.overlap; });
  }
  for (const auto& e : order) {
    if (match[e.right] || left_taken[e.left]) continue;
    if (max_overlap >= defect_threshold && e.overlap >= defect_threshold) {
      // a near tie with another still-free left means the pairing is not determined
      for (const auto& other : edges) {
        if (other.right == e.right && other.left != e.left && !left_taken[other.left] &&
            other.overlap >= 0.99 * e.overlap) {
          throw AmbiguousPairing("pair_left_right: degenerate cluster with tied overlaps");
        }
      }
    }
    match[e.right] = e.left;
    left_taken[e.left] = true;
  }
}

}  // namespace

bool BiorthoSpectrum::any_defective() const noexcept {
  return std::any_of(defective.begin(), defective.end(), [](bool b) { return b; });
}

double BiorthoSpectrum::min_self_overlap() const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (const cplx& s : self_overlaps) m = std::min(m, std::abs(s));
  return m;
}

BiorthoSpectrum pair_left_right(const ComplexMatrix& h, const BiorthoOptions& opts) {
  const RawSpectrum right = eigendecompose(h, opts.tol);
  const RawSpectrum left = eigendecompose(adjoint(h), opts.tol);
  const std::size_t n = right.dim();
  const double floor = 1e3 * kEps * std::max(1.0, frobenius_norm(h));

  const auto dist = [&](std::size_t i, std::size_t l) {
    return std::abs(right.eigenvalues[i] - std::conj(left.eigenvalues[l]));
  };

  // candidate lefts for each right: everything within ratio * best distance
  std::vector<Edge> edges;
  DisjointSets sets(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l) best = std::min(best, dist(i, l));
    const double cutoff = opts.ambiguity_ratio * std::max(best, floor);
    for (std::size_t l = 0; l < n; ++l) {
      const double d = dist(i, l);
      if (d <= cutoff) {
        edges.push_back({i, l, d, std::abs(inner(left.right_vectors[l], right.right_vectors[i]))});
        sets.unite(i, n + l);
      }
    }
  }

  std::vector<std::optional<std::size_t>> match(n);
  std::vector<bool> left_taken(n, false);
  std::vector<bool> defective(n, false);

  std::vector<std::vector<Edge>> clusters(2 * n);
  for (const auto& e : edges) clusters[sets.find(e.right)].push_back(e);
  for (auto& cluster : clusters) {
    if (cluster.empty()) continue;
    std::vector<std::size_t> rights, lefts;
    for (const auto& e : cluster) {
      rights.push_back(e.right);
      lefts.push_back(e.left);
    }
    std::sort(rights.begin(), rights.end());
    rights.erase(std::unique(rights.begin(), rights.end()), rights.end());
    std::sort(lefts.begin(), lefts.end());
    lefts.erase(std::unique(lefts.begin(), lefts.end()), lefts.end());
    if (rights.size() == 1 && lefts.size() == 1) {
      match[rights[0]] = lefts[0];
      left_taken[lefts[0]] = true;
      continue;
    }
    resolve_cluster(cluster, opts.defect_threshold, match, left_taken, defective);
  }

  // anything still unmatched (unequal cluster sizes) takes the nearest free left
  for (std::size_t i = 0; i < n; ++i) {
    if (match[i]) continue;
    std::optional<std::size_t> best;
    for (std::size_t l = 0; l < n; ++l) {
      if (left_taken[l]) continue;
      if (!best || dist(i, l) < dist(i, *best)) best = l;
    }
    if (!best) throw AmbiguousPairing("pair_left_right: no perfect matching");
    match[i] = best;
    left_taken[*best] = true;
  }

  BiorthoSpectrum out;
  out.eigenvalues = right.eigenvalues;
  out.rights.resize(n);
  out.lefts.resize(n);
  out.self_overlaps.resize(n);
  out.defective = defective;
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexVector& r = right.right_vectors[i];
    const ComplexVector& l = left.right_vectors[*match[i]];
    const cplx s = inner(l, r);
    out.self_overlaps[i] = s;
    if (std::abs(s) < opts.defect_threshold) out.defective[i] = true;
    if (out.defective[i]) {
      out.rights[i] = r;
      out.lefts[i] = l;
      continue;
    }
    const double root = std::sqrt(std::abs(s));
    out.rights[i] = scaled(r, 1.0 / root);
    out.lefts[i] = scaled(l, root / std::conj(s));
  }
  return out;
}

BiorthoSpectrum regauge_rights(BiorthoSpectrum spec, std::span<const cplx> factors) {
  if (factors.size() != spec.dim()) throw InvalidInput("regauge_rights: factor count mismatch");
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    if (factors[i] == cplx{}) throw InvalidInput("regauge_rights: zero gauge factor");
    spec.rights[i] = scaled(spec.rights[i], factors[i]);
    spec.lefts[i] = scaled(spec.lefts[i], 1.0 / std::conj(factors[i]));
  }
  return spec;
}

GMetric build_g_metric(const BiorthoSpectrum& spec, double tol) {
  if (spec.any_defective()) {
    throw DefectiveSpectrum("build_g_metric: spectrum contains defective states");
  }
  const std::size_t n = spec.dim();
  ComplexMatrix from_lefts(n);
  ComplexMatrix right_sum(n);
  for (std::size_t i = 0; i < n; ++i) {
    from_lefts += outer(spec.lefts[i], spec.lefts[i]);
    right_sum += outer(spec.rights[i], spec.rights[i]);
  }
  InvertOptions iopts;
  iopts.tol = tol;
  Inversion inv;
  try {
    inv = invert_with_condition(right_sum, iopts);
  } catch (const SingularMatrix& e) {
    throw ConstructionMismatch(std::string("build_g_metric: inverse route failed: ") + e.what(),
                               std::numeric_limits<double>::infinity());
  }
  const double gnorm = frobenius_norm(from_lefts);
  const double deviation = frobenius_norm(from_lefts - inv.inverse);
  if (deviation > tol * std::max(1.0, inv.condition_estimate) * std::max(1.0, gnorm)) {
    throw ConstructionMismatch("build_g_metric: sum-of-lefts and inverse-sum-of-rights disagree",
                               deviation);
  }
  ComplexMatrix g = from_lefts + adjoint(from_lefts);
  g *= 0.5;
  return GMetric{std::move(g), GConstruction::SumOfLefts, inv.condition_estimate};
}

cplx g_expectation(const GMetric& g, const ComplexMatrix& o, std::span<const cplx> r,
                   double zero_tol) {
  if (o.dim() != g.matrix.dim() || r.size() != o.dim()) {
    throw InvalidInput("g_expectation: dimension mismatch");
  }
  const ComplexVector gr = g.matrix * r;
  const cplx norm = inner(r, gr);
  const double rr = norm2(r);
  if (std::abs(norm) <= zero_tol * rr * rr) {
    throw ZeroNorm("g_expectation: <R|G|R> vanishes");
  }
  const ComplexVector gor = g.matrix * (o * r);
  return inner(r, gor) / norm;
}

GoodObservableCheck is_good_observable(const ComplexMatrix& o, const GMetric& g, double tol) {
  if (o.dim() != g.matrix.dim()) throw InvalidInput("is_good_observable: dimension mismatch");
  const double defect = frobenius_norm(adjoint(o) * g.matrix - g.matrix * o);
  const double bound = tol * frobenius_norm(g.matrix) * frobenius_norm(o);
  return GoodObservableCheck{defect <= bound, defect};
}

PhaseLabel phase_classify(const BiorthoSpectrum& spec, double reality_tol, double ep_tol) {
  PhaseLabel label;
  for (const cplx& e : spec.eigenvalues) {
    label.max_imag = std::max(label.max_imag, std::abs(e.imag()));
    if (std::abs(e.imag()) > reality_tol) ++label.complex_count;
  }
  const std::size_t n = spec.dim();
  label.min_gap = n < 2 ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      label.min_gap = std::min(label.min_gap, std::abs(spec.eigenvalues[i] - spec.eigenvalues[j]));

  if (spec.min_self_overlap() < ep_tol) {
    label.phase = Phase::NearEP;
  } else if (label.complex_count == 0) {
    label.phase = Phase::Unbroken;
  } else {
    label.phase = Phase::Broken;
  }
  return label;
}

double default_reality_tol(const ComplexMatrix& h) noexcept {
  return 1e-9 * std::max(1.0, frobenius_norm(h));
}

const char* to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Unbroken: return "unbroken";
    case Phase::Broken: return "broken";
    case Phase::NearEP: return "near-ep";
  }
  return "unknown";
}

double biorthogonality_error(const BiorthoSpectrum& spec) noexcept {
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    if (spec.defective[i]) continue;
    for (std::size_t j = 0; j < spec.dim(); ++j) {
      if (spec.defective[j]) continue;
      const cplx expected = i == j ? cplx{1.0, 0.0} : cplx{};
      worst = std::max(worst, std::abs(inner(spec.lefts[i], spec.rights[j]) - expected));
    }
  }
  return worst;
}

double completeness_error(const BiorthoSpectrum& spec) {
  const std::size_t n = spec.dim();
  ComplexMatrix sum(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.defective[i]) continue;
    sum += outer(spec.rights[i], spec.lefts[i]);
  }
  return frobenius_norm(sum - ComplexMatrix::identity(n));
}

}  // namespace nhft
