#include "properties.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "nhft/biortho.hpp"
#include "oracles.hpp"

namespace oracle {

using namespace nhft;

const char* family_name(Family f) {
  switch (f) {
    case Family::RandomMatrix: return "random-matrix";
    case Family::TwoLevel: return "two-level";
    case Family::FourLevel: return "four-level";
    case Family::LatticePT: return "lattice-pt";
    case Family::LatticeStaggered: return "lattice-staggered";
  }
  return "?";
}

std::vector<Family> all_families() {
  return {Family::RandomMatrix, Family::TwoLevel, Family::FourLevel, Family::LatticePT,
          Family::LatticeStaggered};
}

namespace {

ComplexMatrix draw(Family family, std::uint64_t seed, bool& is_model) {
  std::mt19937_64 rng(seed * 7919 + static_cast<std::uint64_t>(family));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  is_model = family != Family::RandomMatrix;
  switch (family) {
    case Family::RandomMatrix: return random_matrix(2 + seed % 9, seed);
    case Family::TwoLevel: return build(ModelInstance::two_level(2.0 * u(rng)));
    case Family::FourLevel: return build(ModelInstance::four_level(2.5 * u(rng)));
    case Family::LatticePT: {
      const int L = 2 * (1 + static_cast<int>(u(rng) * 8));
      return build(ModelInstance::lattice_pt(L, 1.5 * u(rng)));
    }
    case Family::LatticeStaggered: {
      const int L = 2 * (2 + static_cast<int>(u(rng) * 9));
      const int r = 1 + static_cast<int>(u(rng) * (L / 2));
      return build(ModelInstance::lattice_staggered(L, r, 1.2 * u(rng)));
    }
  }
  return {};
}

}  // namespace

PropertyOutcome check_properties(Family family, std::uint64_t seed) {
  PropertyOutcome out;
  bool is_model = false;
  const ComplexMatrix h = draw(family, seed, is_model);
  const std::size_t n = h.dim();
  std::ostringstream why;

  // PT invariance holds exactly for every model matrix, EP or not
  if (is_model) {
    const ComplexMatrix p = parity_matrix(n);
    const double dev = frobenius_norm(p * conjugate(h) * p - h);
    out.pt_invariance = dev <= 1e-14 * frobenius_norm(h);
    if (!out.pt_invariance) why << "PT deviation " << dev << "; ";
  }

  const BiorthoSpectrum spec = pair_left_right(h);
  if (spec.min_self_overlap() < 1e-3) {
    out.detail = "near EP, skipped";
    return out;
  }
  out.evaluated = true;

  const double be = biorthogonality_error(spec);
  out.biorthogonality = be <= 1e-8;
  if (!out.biorthogonality) why << "biorthogonality " << be << "; ";
  const double ce = completeness_error(spec);
  out.completeness = ce <= static_cast<double>(n) * 1e-8;
  if (!out.completeness) why << "completeness " << ce << "; ";

  ComplexMatrix raw(n);
  for (std::size_t i = 0; i < n; ++i) raw += outer(spec.lefts[i], spec.lefts[i]);
  const GMetric g = build_g_metric(spec, 1e-9);
  const double herm = frobenius_norm(raw - adjoint(raw));
  out.g_hermitian = herm <= 1e-12 * frobenius_norm(raw) &&
                    frobenius_norm(g.matrix - adjoint(g.matrix)) == 0.0;
  if (!out.g_hermitian) why << "G hermiticity " << herm << "; ";

  // <L_i| = <R_i|G, i.e. G R_i = L_i
  double lvg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexVector gr = g.matrix * spec.rights[i];
    for (std::size_t k = 0; k < n; ++k)
      lvg = std::max(lvg, std::abs(gr[k] - spec.lefts[i][k]) / std::max(1.0, norm2(spec.lefts[i])));
  }
  out.left_via_g = lvg <= 1e-8;
  if (!out.left_via_g) why << "left via G " << lvg << "; ";

  // good observables: H itself when it qualifies, and O = G^-1 K for Hermitian K
  std::vector<ComplexMatrix> candidates;
  if (is_good_observable(h, g).good) candidates.push_back(h);
  candidates.push_back(invert(g.matrix, 1e-9) * random_hermitian(n, seed + 5000));
  for (const ComplexMatrix& o : candidates) {
    if (!is_good_observable(o, g, 1e-8).good) {
      out.good_observable_reality = false;
      why << "constructed observable not good; ";
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const cplx v = g_expectation(g, o, spec.rights[i]);
      if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v))) {
        out.good_observable_reality = false;
        why << "Im <O>_G = " << v.imag() << "; ";
        break;
      }
    }
  }

  if (is_model) {
    std::vector<cplx> conj_ev(spec.eigenvalues);
    for (cplx& e : conj_ev) e = std::conj(e);
    const double d = multiset_distance(spec.eigenvalues, conj_ev);
    out.conjugate_closure = d <= 1e-8 * std::max(1.0, frobenius_norm(h));
    if (!out.conjugate_closure) why << "conjugate closure " << d << "; ";
  }
  out.detail = why.str();
  return out;
}

SuiteSummary run_suite(Family family, std::size_t count) {
  SuiteSummary s;
  for (std::uint64_t seed = 1; seed <= count; ++seed) {
    const PropertyOutcome o = check_properties(family, seed);
    if (!o.pt_invariance) {
      ++s.failed;
      if (s.first_failure.empty()) s.first_failure = "seed " + std::to_string(seed) + ": " + o.detail;
      continue;
    }
    if (!o.evaluated) {
      ++s.skipped;
      continue;
    }
    ++s.evaluated;
    if (!o.all()) {
      ++s.failed;
      if (s.first_failure.empty()) s.first_failure = "seed " + std::to_string(seed) + ": " + o.detail;
    }
  }
  return s;
}

}  // namespace oracle
