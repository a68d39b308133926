#include "nhft/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nhft/errors.hpp"

namespace nhft {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool finite(cplx z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("matrix dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()));
  }
}

// Plane rotation G = [[c, s], [-conj(s), c]] with c real, chosen so that
// G * [a; b] = [r; 0].
struct Givens {
  double c = 1.0;
  cplx s{0.0, 0.0};

  static Givens make(cplx a, cplx b, cplx* r = nullptr) {
    Givens g;
    const double abs_a = std::abs(a);
    const double abs_b = std::abs(b);
    if (abs_b == 0.0) {
      if (r) *r = a;
      return g;
    }
    if (abs_a == 0.0) {
      g.c = 0.0;
      g.s = std::conj(b) / abs_b;
      if (r) *r = abs_b;
      return g;
    }
    const double rho = std::hypot(abs_a, abs_b);
    g.c = abs_a / rho;
    g.s = (a / abs_a) * std::conj(b) / rho;
    if (r) *r = a / abs_a * rho;
    return g;
  }
};

// rows p, q of m over columns [col_begin, col_end): m <- G m
void rotate_rows(ComplexMatrix& m, const Givens& g, std::size_t p, std::size_t q,
                 std::size_t col_begin, std::size_t col_end) {
  for (std::size_t j = col_begin; j < col_end; ++j) {
    const cplx x = m(p, j);
    const cplx y = m(q, j);
    m(p, j) = g.c * x + g.s * y;
    m(q, j) = -std::conj(g.s) * x + g.c * y;
  }
}

// columns p, q of m over rows [row_begin, row_end): m <- m G^H
void rotate_cols(ComplexMatrix& m, const Givens& g, std::size_t p, std::size_t q,
                 std::size_t row_begin, std::size_t row_end) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    const cplx x = m(i, p);
    const cplx y = m(i, q);
    m(i, p) = x * g.c + y * std::conj(g.s);
    m(i, q) = -x * g.s + y * g.c;
  }
}

// Householder reduction to upper Hessenberg form: m <- Q^H m Q, q accumulates Q.
void reduce_to_hessenberg(ComplexMatrix& m, ComplexMatrix& q) {
  const std::size_t n = m.dim();
  ComplexVector v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm = std::hypot(xnorm, std::abs(m(i, k)));
    if (xnorm == 0.0) continue;
    const cplx x0 = m(k + 1, k);
    const cplx phase = std::abs(x0) == 0.0 ? cplx{1.0, 0.0} : x0 / std::abs(x0);
    const cplx alpha = -phase * xnorm;

    std::fill(v.begin(), v.end(), cplx{});
    for (std::size_t i = k + 1; i < n; ++i) v[i] = m(i, k);
    v[k + 1] -= alpha;
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm = std::hypot(vnorm, std::abs(v[i]));
    if (vnorm == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;

    // m <- (I - 2vv^H) m
    for (std::size_t j = 0; j < n; ++j) {
      cplx dot{};
      for (std::size_t i = k + 1; i < n; ++i) dot += std::conj(v[i]) * m(i, j);
      dot *= 2.0;
      for (std::size_t i = k + 1; i < n; ++i) m(i, j) -= v[i] * dot;
    }
    // m <- m (I - 2vv^H), q <- q (I - 2vv^H)
    for (ComplexMatrix* target : {&m, &q}) {
      for (std::size_t i = 0; i < n; ++i) {
        cplx dot{};
        for (std::size_t j = k + 1; j < n; ++j) dot += (*target)(i, j) * v[j];
        dot *= 2.0;
        for (std::size_t j = k + 1; j < n; ++j) (*target)(i, j) -= dot * std::conj(v[j]);
      }
    }
    m(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) m(i, k) = cplx{};
  }
}

cplx wilkinson_shift(const ComplexMatrix& t, std::size_t iu, std::size_t iter) {
  if (iter == 10 || iter == 20) {
    // exceptional shift
    const double s = std::abs(t(iu, iu - 1).real()) +
                     (iu >= 2 ? std::abs(t(iu - 1, iu - 2).real()) : 0.0);
    return t(iu, iu) + s;
  }
  cplx a = t(iu - 1, iu - 1), b = t(iu - 1, iu), c = t(iu, iu - 1), d = t(iu, iu);
  const double scale = std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
  if (scale == 0.0) return cplx{};
  a /= scale;
  b /= scale;
  c /= scale;
  d /= scale;
  const cplx bc = b * c;
  const cplx diff = a - d;
  const cplx disc = std::sqrt(diff * diff + 4.0 * bc);
  const cplx det = a * d - bc;
  const cplx tr = a + d;
  cplx ev1 = (tr + disc) / 2.0;
  cplx ev2 = (tr - disc) / 2.0;
  if (std::abs(ev1) > std::abs(ev2)) {
    ev2 = det / ev1;
  } else if (std::abs(ev2) != 0.0) {
    ev1 = det / ev2;
  }
  return scale * (std::abs(ev1 - d) < std::abs(ev2 - d) ? ev1 : ev2);
}

// Complex Schur form of an upper Hessenberg matrix: t <- Z^H t Z, z accumulates.
void hessenberg_qr(ComplexMatrix& t, ComplexMatrix* z, std::size_t max_sweeps) {
  const std::size_t n = t.dim();
  if (n < 2) return;
  std::size_t iu = n - 1;
  std::size_t iter = 0;
  std::size_t total = 0;
  const auto negligible = [&](std::size_t i) {
    const double scale = std::abs(t(i, i)) + std::abs(t(i + 1, i + 1));
    if (std::abs(t(i + 1, i)) <= kEps * scale || std::abs(t(i + 1, i)) <= std::numeric_limits<double>::min()) {
      t(i + 1, i) = cplx{};
      return true;
    }
    return false;
  };

  while (true) {
    while (iu > 0) {
      if (!negligible(iu - 1)) break;
      iter = 0;
      --iu;
    }
    if (iu == 0) break;
    ++iter;
    if (++total > max_sweeps) {
      std::vector<std::size_t> failed(iu + 1);
      std::iota(failed.begin(), failed.end(), std::size_t{0});
      throw NonConvergence("complex QR iteration cap reached", std::move(failed));
    }
    std::size_t il = iu - 1;
    while (il > 0 && !negligible(il - 1)) --il;

    const cplx shift = wilkinson_shift(t, iu, iter);
    Givens g = Givens::make(t(il, il) - shift, t(il + 1, il));
    rotate_rows(t, g, il, il + 1, il, n);
    rotate_cols(t, g, il, il + 1, 0, std::min(il + 2, iu) + 1);
    if (z) rotate_cols(*z, g, il, il + 1, 0, n);

    for (std::size_t i = il + 1; i < iu; ++i) {
      cplx r;
      g = Givens::make(t(i, i - 1), t(i + 1, i - 1), &r);
      t(i, i - 1) = r;
      t(i + 1, i - 1) = cplx{};
      rotate_rows(t, g, i, i + 1, i, n);
      rotate_cols(t, g, i, i + 1, 0, std::min(i + 2, iu) + 1);
      if (z) rotate_cols(*z, g, i, i + 1, 0, n);
    }
  }
}

// Eigenvector k of upper-triangular t by back substitution; tiny diagonal
// differences are replaced by a floor so nearly defective blocks stay finite.
ComplexVector triangular_eigenvector(const ComplexMatrix& t, std::size_t k, double floor) {
  const std::size_t n = t.dim();
  ComplexVector y(n, cplx{});
  y[k] = 1.0;
  const cplx lambda = t(k, k);
  for (std::size_t jj = k; jj-- > 0;) {
    cplx acc{};
    for (std::size_t m = jj + 1; m <= k; ++m) acc += t(jj, m) * y[m];
    cplx denom = t(jj, jj) - lambda;
    if (std::abs(denom) < floor) denom = floor;
    y[jj] = -acc / denom;
    if (std::abs(y[jj]) > 1e100) {
      for (std::size_t m = jj; m <= k; ++m) y[m] *= 1e-100;
    }
  }
  return y;
}

double residual_of(const ComplexMatrix& m, std::span<const cplx> v, cplx e, double mnorm) {
  const ComplexVector mv = m * v;
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r = std::hypot(r, std::abs(mv[i] - e * v[i]));
  return mnorm > 0.0 ? r / mnorm : r;
}

void normalize(ComplexVector& v) {
  const double nv = norm2(v);
  if (nv > 0.0) {
    for (auto& x : v) x /= nv;
  }
}

struct SchurResult {
  ComplexMatrix t;
  ComplexMatrix z;
};

SchurResult schur(const ComplexMatrix& m, const EigenOptions& opts, bool want_vectors) {
  SchurResult s{m, ComplexMatrix::identity(m.dim())};
  reduce_to_hessenberg(s.t, s.z);
  hessenberg_qr(s.t, want_vectors ? &s.z : nullptr,
                std::max<std::size_t>(opts.sweeps_per_dim * m.dim(), 30));
  return s;
}

void check_input(const ComplexMatrix& m, double tol) {
  if (m.empty()) throw InvalidInput("eigendecompose: empty matrix");
  if (!m.all_finite()) throw InvalidInput("eigendecompose: non-finite matrix entries");
  if (!(tol > 0.0)) throw InvalidInput("eigendecompose: tol must be positive");
}

// LU factorization with partial pivoting, in place. Returns the smallest pivot magnitude.
struct LU {
  ComplexMatrix lu;
  std::vector<std::size_t> perm;
  double min_pivot = 0.0;
};

LU lu_factor(const ComplexMatrix& m) {
  const std::size_t n = m.dim();
  LU f{m, std::vector<std::size_t>(n), std::numeric_limits<double>::infinity()};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  auto& a = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    f.min_pivot = std::min(f.min_pivot, best);
    if (best == 0.0) continue;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(f.perm[k], f.perm[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      const cplx l = a(i, k);
      if (l == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
    }
  }
  return f;
}

ComplexVector lu_solve(const LU& f, std::span<const cplx> b) {
  const std::size_t n = f.lu.dim();
  ComplexVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

}  // namespace

// --- ComplexMatrix ---------------------------------------------------------

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<cplx> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (data_.size() != dim_ * dim_) {
    throw InvalidInput("ComplexMatrix: expected " + std::to_string(dim_ * dim_) + " entries, got " +
                       std::to_string(data_.size()));
  }
  validate();
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
    : dim_(rows.size()) {
  data_.reserve(dim_ * dim_);
  for (const auto& r : rows) {
    if (r.size() != dim_) throw InvalidInput("ComplexMatrix: rows must form a square matrix");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  validate();
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
  ComplexMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  m.validate();
  return m;
}

ComplexVector ComplexMatrix::column(std::size_t c) const {
  ComplexVector v(dim_);
  for (std::size_t i = 0; i < dim_; ++i) v[i] = (*this)(i, c);
  return v;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), finite);
}

void ComplexMatrix::validate() const {
  if (!all_finite()) throw InvalidInput("ComplexMatrix: non-finite entry");
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) noexcept {
  for (auto& x : data_) x *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  require_same_dim(lhs, rhs);
  const std::size_t n = lhs.dim();
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const cplx a = lhs(i, k);
      if (a == cplx{}) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

ComplexMatrix operator*(cplx s, ComplexMatrix m) { return m *= s; }

ComplexVector operator*(const ComplexMatrix& m, std::span<const cplx> v) {
  if (v.size() != m.dim()) throw InvalidInput("matrix-vector dimension mismatch");
  ComplexVector out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    cplx acc{};
    for (std::size_t j = 0; j < m.dim(); ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& m) {
  ComplexMatrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = std::conj(m(j, i));
  return out;
}

ComplexMatrix conjugate(const ComplexMatrix& m) {
  ComplexMatrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = std::conj(m(i, j));
  return out;
}

ComplexMatrix transpose(const ComplexMatrix& m) {
  ComplexMatrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = m(j, i);
  return out;
}

double frobenius_norm(const ComplexMatrix& m) noexcept {
  double s = 0.0;
  for (const cplx& x : m.data()) s += std::norm(x);
  return std::sqrt(s);
}

double norm1(const ComplexMatrix& m) noexcept {
  double best = 0.0;
  for (std::size_t j = 0; j < m.dim(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i) col += std::abs(m(i, j));
    best = std::max(best, col);
  }
  return best;
}

cplx trace(const ComplexMatrix& m) noexcept {
  cplx t{};
  for (std::size_t i = 0; i < m.dim(); ++i) t += m(i, i);
  return t;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) noexcept {
  cplx acc{};
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(std::span<const cplx> v) noexcept {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

ComplexMatrix outer(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw InvalidInput("outer: size mismatch");
  ComplexMatrix m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * std::conj(b[j]);
  return m;
}

ComplexVector scaled(std::span<const cplx> v, cplx s) {
  ComplexVector out(v.begin(), v.end());
  for (auto& x : out) x *= s;
  return out;
}

// --- eigensolver -------------------------------------------------------------

std::vector<std::size_t> canonical_order(std::span<const cplx> values, double group_tol) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a].real() < values[b].real();
  });
  // chain-group nearly equal real parts, then order each group by imaginary part
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() &&
           values[order[end]].real() - values[order[end - 1]].real() <= group_tol) {
      ++end;
    }
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return values[a].imag() < values[b].imag();
                     });
    start = end;
  }
  return order;
}

namespace {
double ordering_tol(const ComplexMatrix& m) {
  return 1e3 * kEps * std::max(1.0, frobenius_norm(m));
}
}  // namespace

ComplexVector eigenvalues(const ComplexMatrix& m, const EigenOptions& opts) {
  check_input(m, opts.tol);
  const SchurResult s = schur(m, opts, false);
  ComplexVector ev(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) ev[i] = s.t(i, i);
  const auto order = canonical_order(ev, ordering_tol(m));
  ComplexVector out(ev.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = ev[order[i]];
  return out;
}

RawSpectrum eigendecompose(const ComplexMatrix& m, double tol) {
  EigenOptions opts;
  opts.tol = tol;
  return eigendecompose(m, opts);
}

RawSpectrum eigendecompose(const ComplexMatrix& m, const EigenOptions& opts) {
  check_input(m, opts.tol);
  const std::size_t n = m.dim();
  const double mnorm = frobenius_norm(m);
  const SchurResult s = schur(m, opts, true);

  const double floor = kEps * std::max(mnorm, std::numeric_limits<double>::min());
  ComplexVector ev(n);
  std::vector<ComplexVector> vecs(n);
  std::vector<double> res(n);
  std::vector<std::size_t> failed;
  for (std::size_t k = 0; k < n; ++k) {
    ev[k] = s.t(k, k);
    const ComplexVector y = triangular_eigenvector(s.t, k, floor);
    ComplexVector v = s.z * y;
    normalize(v);
    double r = residual_of(m, v, ev[k], mnorm);
    if (r > opts.tol) {
      // inverse iteration on the original matrix, shift slightly off the eigenvalue
      ComplexMatrix shifted = m;
      const cplx shift = ev[k] + cplx(floor * 10.0, floor * 10.0);
      for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= shift;
      const LU f = lu_factor(shifted);
      for (int it = 0; it < 3 && r > opts.tol; ++it) {
        ComplexVector w = lu_solve(f, v);
        if (!std::all_of(w.begin(), w.end(), finite)) break;
        normalize(w);
        const double rw = residual_of(m, w, ev[k], mnorm);
        if (rw < r) {
          v = std::move(w);
          r = rw;
        }
      }
    }
    if (!(r <= opts.tol)) failed.push_back(k);
    vecs[k] = std::move(v);
    res[k] = r;
  }

  const auto order = canonical_order(ev, ordering_tol(m));
  if (!failed.empty()) {
    std::vector<std::size_t> canonical_failed;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (std::find(failed.begin(), failed.end(), order[pos]) != failed.end()) {
        canonical_failed.push_back(pos);
      }
    }
    throw NonConvergence("eigenvector residual above tolerance", std::move(canonical_failed));
  }

  RawSpectrum out;
  out.eigenvalues.reserve(n);
  out.right_vectors.reserve(n);
  out.residuals.reserve(n);
  for (std::size_t idx : order) {
    out.eigenvalues.push_back(ev[idx]);
    out.right_vectors.push_back(std::move(vecs[idx]));
    out.residuals.push_back(res[idx]);
  }
  return out;
}

// --- inversion ---------------------------------------------------------------

Inversion invert_with_condition(const ComplexMatrix& m, const InvertOptions& opts) {
  if (m.empty()) throw InvalidInput("invert: empty matrix");
  if (!m.all_finite()) throw InvalidInput("invert: non-finite matrix entries");
  const std::size_t n = m.dim();
  const double mnorm1 = norm1(m);
  const LU f = lu_factor(m);
  const double pivot_floor = static_cast<double>(n) * kEps * std::max(mnorm1, std::numeric_limits<double>::min());
  if (!(f.min_pivot > pivot_floor)) {
    throw SingularMatrix("invert: pivot below threshold", std::numeric_limits<double>::infinity());
  }
  ComplexMatrix inv(n);
  ComplexVector e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), cplx{});
    e[j] = 1.0;
    const ComplexVector col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  const double cond = mnorm1 * norm1(inv);
  if (!std::isfinite(cond) || cond > opts.condition_cap) {
    throw SingularMatrix("invert: condition estimate exceeds cap", cond);
  }
  const ComplexMatrix check = m * inv - ComplexMatrix::identity(n);
  if (frobenius_norm(check) > opts.tol * std::max(1.0, cond)) {
    throw SingularMatrix("invert: residual ||M M^-1 - I|| above tol * cond", cond);
  }
  return Inversion{std::move(inv), cond};
}

ComplexMatrix invert(const ComplexMatrix& m, double tol) {
  InvertOptions opts;
  opts.tol = tol;
  return invert_with_condition(m, opts).inverse;
}

ComplexVector solve(const ComplexMatrix& m, std::span<const cplx> b) {
  if (b.size() != m.dim()) throw InvalidInput("solve: size mismatch");
  return lu_solve(lu_factor(m), b);
}

}  // namespace nhft
