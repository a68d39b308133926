#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nhft/linalg.hpp"

namespace nhft {

enum class ModelKind { TwoLevel, FourLevel, LatticePT, LatticeStaggered };

/// One of the PT-symmetric tight-binding Hamiltonians H(lambda).
///
/// Lattice kinds are single-particle hopping matrices on an open chain of L
/// sites (hopping -1, unit spacing). Sites are 1-based: LatticePT puts +i*lambda
/// on site L/2 and -i*lambda on site L/2+1; LatticeStaggered puts
/// i*lambda*(-1)^j on sites j in [L/2-(r-1), L/2+r].
struct ModelInstance {
  ModelKind kind = ModelKind::TwoLevel;
  int sites = 2;
  int r = 1;
  double lambda = 0.0;

  static ModelInstance two_level(double lambda);
  static ModelInstance four_level(double lambda);
  static ModelInstance lattice_pt(int sites, double lambda);
  static ModelInstance lattice_staggered(int sites, int r, double lambda);

  ModelInstance at(double new_lambda) const;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(sites); }
  /// Throws InvalidInput for odd or non-positive L, or r outside [1, L/2].
  void validate() const;
};

ComplexMatrix build(const ModelInstance& model);
/// dH/dlambda; every model is affine in lambda so this is exact.
ComplexMatrix d_dlambda(const ModelInstance& model);

/// Parity (site j -> L-j+1) as a permutation matrix.
ComplexMatrix parity_matrix(std::size_t dim);

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind) noexcept;
bool has_closed_form(ModelKind kind) noexcept;

struct ClosedFormBranch {
  std::string label;
  std::function<cplx(double)> energy;
  std::function<cplx(double)> derivative;
};

/// Closed-form eigenvalue branches (principal square roots, which reproduce the
/// broken-phase lists) and critical couplings for TwoLevel and FourLevel.
struct ClosedFormRef {
  std::vector<ClosedFormBranch> branches;
  std::vector<double> critical_points;
  /// G metric in a fixed right-vector gauge, where the model provides one:
  /// TwoLevel uses the symmetric gauge of pair_left_right (unbroken only);
  /// FourLevel uses right vectors with last component 1.
  std::function<std::optional<ComplexMatrix>(double)> g_matrix;

  /// Index of the branch whose energy at lambda is nearest to e.
  std::size_t nearest_branch(cplx e, double lambda) const;
};

ClosedFormRef closed_form(const ModelInstance& model);

}  // namespace nhft
