#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nhft/linalg.hpp"

namespace nhft {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton on the Legendre recurrence).
/// Rules are cached per n; safe to call from several threads.
const GaussRule& gauss_legendre(std::size_t n);

/// Pairwise (tree) summation; the result depends only on the input order.
cplx pairwise_sum(std::span<const cplx> values);
double pairwise_sum(std::span<const double> values);

}  // namespace nhft
