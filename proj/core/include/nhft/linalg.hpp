#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nhft {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

inline constexpr double kDefaultTol = 1e-12;

/// Dense square complex matrix, row-major.
///
/// Construction rejects non-square shapes and non-finite entries; element
/// writes through operator() are unchecked, so builders that mutate a matrix
/// should call validate() when done.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t dim);
  ComplexMatrix(std::size_t dim, std::vector<cplx> row_major);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix diagonal(std::span<const cplx> diag);

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  cplx operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * dim_ + col];
  }
  cplx& operator()(std::size_t row, std::size_t col) noexcept {
    return data_[row * dim_ + col];
  }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<const cplx> row(std::size_t r) const noexcept {
    return std::span<const cplx>(data_).subspan(r * dim_, dim_);
  }
  ComplexVector column(std::size_t c) const;

  bool all_finite() const noexcept;
  /// Throws InvalidInput if any entry is NaN or infinite.
  void validate() const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(cplx s) noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(cplx s, ComplexMatrix m);
ComplexVector operator*(const ComplexMatrix& m, std::span<const cplx> v);

/// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& m);
ComplexMatrix conjugate(const ComplexMatrix& m);
ComplexMatrix transpose(const ComplexMatrix& m);

double frobenius_norm(const ComplexMatrix& m) noexcept;
double norm1(const ComplexMatrix& m) noexcept;
cplx trace(const ComplexMatrix& m) noexcept;

/// <a|b> = sum conj(a_k) b_k
cplx inner(std::span<const cplx> a, std::span<const cplx> b) noexcept;
double norm2(std::span<const cplx> v) noexcept;
/// |a><b|
ComplexMatrix outer(std::span<const cplx> a, std::span<const cplx> b);
ComplexVector scaled(std::span<const cplx> v, cplx s);

struct RawSpectrum {
  ComplexVector eigenvalues;
  std::vector<ComplexVector> right_vectors;  // unit Euclidean norm
  std::vector<double> residuals;             // ||Mv - Ev|| / ||M||_F
  std::size_t dim() const noexcept { return eigenvalues.size(); }
};

struct EigenOptions {
  double tol = kDefaultTol;
  /// QR sweeps allowed per unit of dimension.
  std::size_t sweeps_per_dim = 100;
};

/// Eigenvalues and unit right eigenvectors of a general complex matrix.
///
/// Hessenberg reduction, implicitly shifted complex QR to Schur form, then
/// eigenvectors by back substitution on the triangular factor. Pairs whose
/// backward error exceeds tol·||M||_F get inverse-iteration refinement on the
/// original matrix; if any still fail NonConvergence lists them.
/// Output is in canonical order (ascending real part, ties broken by
/// imaginary part).
RawSpectrum eigendecompose(const ComplexMatrix& m, const EigenOptions& opts = {});
RawSpectrum eigendecompose(const ComplexMatrix& m, double tol);

/// Eigenvalues only (no eigenvectors), canonical order.
ComplexVector eigenvalues(const ComplexMatrix& m, const EigenOptions& opts = {});

/// Canonical ordering permutation: ascending real part; real parts that agree
/// within `group_tol` are ordered by imaginary part.
std::vector<std::size_t> canonical_order(std::span<const cplx> values, double group_tol);

struct Inversion {
  ComplexMatrix inverse;
  double condition_estimate = 0.0;  // ||M||_1 ||M^-1||_1
};

struct InvertOptions {
  double tol = kDefaultTol;
  double condition_cap = 1e15;
};

/// LU with partial pivoting. SingularMatrix when a pivot underflows or the
/// condition estimate exceeds the cap.
Inversion invert_with_condition(const ComplexMatrix& m, const InvertOptions& opts = {});
ComplexMatrix invert(const ComplexMatrix& m, double tol = kDefaultTol);

/// Solve M x = b by LU with partial pivoting (no condition checks).
ComplexVector solve(const ComplexMatrix& m, std::span<const cplx> b);

}  // namespace nhft
