#include "nhft/models.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nhft/errors.hpp"

namespace nhft {

namespace {

constexpr cplx kI{0.0, 1.0};

const double kSqrt5 = std::sqrt(5.0);

// Diagonal gain/loss pattern per unit lambda (purely imaginary).
ComplexVector gain_loss_pattern(const ModelInstance& m) {
  const std::size_t n = m.dim();
  ComplexVector diag(n, cplx{});
  switch (m.kind) {
    case ModelKind::TwoLevel:
    case ModelKind::LatticePT:
      diag[static_cast<std::size_t>(m.sites / 2 - 1)] = kI;
      diag[static_cast<std::size_t>(m.sites / 2)] = -kI;
      break;
    case ModelKind::FourLevel:
      for (std::size_t j = 0; j < n; ++j) diag[j] = (j % 2 == 0) ? kI : -kI;
      break;
    case ModelKind::LatticeStaggered: {
      const int first = m.sites / 2 - (m.r - 1);
      const int last = m.sites / 2 + m.r;
      for (int j = first; j <= last; ++j) {
        diag[static_cast<std::size_t>(j - 1)] = (j % 2 == 0) ? kI : -kI;
      }
      break;
    }
  }
  return diag;
}

cplx csqrt(cplx z) { return std::sqrt(z); }

// sign * sqrt((offset - 2 lambda^2) / 2), principal branch
ClosedFormBranch sqrt_branch(std::string label, double sign, double offset) {
  ClosedFormBranch b;
  b.label = std::move(label);
  b.energy = [sign, offset](double lambda) {
    return sign * csqrt(cplx((offset - 2.0 * lambda * lambda) / 2.0, 0.0));
  };
  b.derivative = [sign, offset](double lambda) {
    const cplx root = csqrt(cplx((offset - 2.0 * lambda * lambda) / 2.0, 0.0));
    return sign * (-2.0 * lambda) / (2.0 * root);
  };
  return b;
}

ComplexMatrix four_level_g_unbroken(double l) {
  const double d = 10.0 * (1.0 - 3.0 * l * l + l * l * l * l);
  const double l2 = l * l;
  ComplexMatrix g{
      {3.0 - 2.0 * l2, kI * l * (3.0 - 2.0 * l2), -(l2 + 1.0), kI * l * (l2 - 4.0)},
      {kI * l * (2.0 * l2 - 3.0), 2.0 - 3.0 * l2, kI * (l2 * l + l), -(l2 + 1.0)},
      {-(l2 + 1.0), -kI * (l2 * l + l), 2.0 - 3.0 * l2, kI * l * (3.0 - 2.0 * l2)},
      {-kI * l * (l2 - 4.0), -(l2 + 1.0), kI * l * (2.0 * l2 - 3.0), 3.0 - 2.0 * l2},
  };
  g *= 1.0 / d;
  return g;
}

ComplexMatrix four_level_g_fully_broken(double l) {
  const double d = 10.0 * (1.0 - 3.0 * l * l + l * l * l * l);
  const double l2 = l * l;
  const double l4 = l2 * l2;
  const double off = -1.0 + 7.0 * l2 - 2.0 * l4;
  ComplexMatrix g{
      {-3.0 + 2.0 * l2, kI * l * (-3.0 + 2.0 * l2), l2 + 1.0, -kI * l * (l2 - 4.0)},
      {kI * l * (-2.0 * l2 + 3.0), 2.0 - 9.0 * l2 + 4.0 * l4, -kI * (l2 * l + l), off},
      {l2 + 1.0, kI * (l2 * l + l), -2.0 + 3.0 * l2, kI * l * (-3.0 + 2.0 * l2)},
      {kI * l * (l2 - 4.0), off, kI * l * (-2.0 * l2 + 3.0), 3.0 - 16.0 * l2 + 6.0 * l4},
  };
  g *= 1.0 / d;
  return g;
}

}  // namespace

ModelInstance ModelInstance::two_level(double lambda) {
  return ModelInstance{ModelKind::TwoLevel, 2, 1, lambda};
}

ModelInstance ModelInstance::four_level(double lambda) {
  return ModelInstance{ModelKind::FourLevel, 4, 1, lambda};
}

ModelInstance ModelInstance::lattice_pt(int sites, double lambda) {
  ModelInstance m{ModelKind::LatticePT, sites, 1, lambda};
  m.validate();
  return m;
}

ModelInstance ModelInstance::lattice_staggered(int sites, int r, double lambda) {
  ModelInstance m{ModelKind::LatticeStaggered, sites, r, lambda};
  m.validate();
  return m;
}

ModelInstance ModelInstance::at(double new_lambda) const {
  ModelInstance m = *this;
  m.lambda = new_lambda;
  return m;
}

void ModelInstance::validate() const {
  if (!std::isfinite(lambda)) throw InvalidInput("model: lambda must be finite");
  switch (kind) {
    case ModelKind::TwoLevel:
      if (sites != 2) throw InvalidInput("two-level model has exactly 2 sites");
      break;
    case ModelKind::FourLevel:
      if (sites != 4) throw InvalidInput("four-level model has exactly 4 sites");
      break;
    case ModelKind::LatticePT:
    case ModelKind::LatticeStaggered:
      if (sites < 2 || sites % 2 != 0) {
        throw InvalidInput("lattice size L must be a positive even integer, got " +
                           std::to_string(sites));
      }
      if (kind == ModelKind::LatticeStaggered && (r < 1 || r > sites / 2)) {
        throw InvalidInput("staggered model needs 1 <= r <= L/2, got r=" + std::to_string(r));
      }
      break;
  }
}

ComplexMatrix build(const ModelInstance& model) {
  model.validate();
  const std::size_t n = model.dim();
  ComplexMatrix h(n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    h(j, j + 1) = -1.0;
    h(j + 1, j) = -1.0;
  }
  const ComplexVector pattern = gain_loss_pattern(model);
  for (std::size_t j = 0; j < n; ++j) h(j, j) = model.lambda * pattern[j];
  return h;
}

ComplexMatrix d_dlambda(const ModelInstance& model) {
  model.validate();
  return ComplexMatrix::diagonal(gain_loss_pattern(model));
}

ComplexMatrix parity_matrix(std::size_t dim) {
  ComplexMatrix p(dim);
  for (std::size_t j = 0; j < dim; ++j) p(j, dim - 1 - j) = 1.0;
  return p;
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "two-level") return ModelKind::TwoLevel;
  if (name == "four-level") return ModelKind::FourLevel;
  if (name == "lattice-pt") return ModelKind::LatticePT;
  if (name == "lattice-staggered") return ModelKind::LatticeStaggered;
  throw InvalidInput("unknown model '" + std::string(name) +
                     "' (expected two-level, four-level, lattice-pt, lattice-staggered)");
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::TwoLevel: return "two-level";
    case ModelKind::FourLevel: return "four-level";
    case ModelKind::LatticePT: return "lattice-pt";
    case ModelKind::LatticeStaggered: return "lattice-staggered";
  }
  return "unknown";
}

bool has_closed_form(ModelKind kind) noexcept {
  return kind == ModelKind::TwoLevel || kind == ModelKind::FourLevel;
}

std::size_t ClosedFormRef::nearest_branch(cplx e, double lambda) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const double d = std::abs(branches[b].energy(lambda) - e);
    if (d < best_d) {
      best_d = d;
      best = b;
    }
  }
  return best;
}

ClosedFormRef closed_form(const ModelInstance& model) {
  model.validate();
  ClosedFormRef ref;
  switch (model.kind) {
    case ModelKind::TwoLevel: {
      ref.branches.push_back(sqrt_branch("E-", -1.0, 2.0));
      ref.branches.push_back(sqrt_branch("E+", +1.0, 2.0));
      ref.critical_points = {1.0};
      ref.g_matrix = [](double l) -> std::optional<ComplexMatrix> {
        if (std::abs(l) >= 1.0) return std::nullopt;
        ComplexMatrix g{{1.0, kI * l}, {-kI * l, 1.0}};
        g *= 1.0 / std::sqrt(1.0 - l * l);
        return g;
      };
      break;
    }
    case ModelKind::FourLevel: {
      ref.branches.push_back(sqrt_branch("E1", -1.0, 3.0 - kSqrt5));
      ref.branches.push_back(sqrt_branch("E2", +1.0, 3.0 - kSqrt5));
      ref.branches.push_back(sqrt_branch("E3", -1.0, 3.0 + kSqrt5));
      ref.branches.push_back(sqrt_branch("E4", +1.0, 3.0 + kSqrt5));
      const double c1 = std::sqrt((3.0 - kSqrt5) / 2.0);
      const double c2 = std::sqrt((3.0 + kSqrt5) / 2.0);
      ref.critical_points = {c1, c2};
      ref.g_matrix = [c1, c2](double l) -> std::optional<ComplexMatrix> {
        const double a = std::abs(l);
        if (a < c1) return four_level_g_unbroken(l);
        if (a > c2) return four_level_g_fully_broken(l);
        return std::nullopt;
      };
      break;
    }
    case ModelKind::LatticePT:
    case ModelKind::LatticeStaggered:
      throw Unsupported("closed_form: no closed form for lattice models");
  }
  return ref;
}

}  // namespace nhft
