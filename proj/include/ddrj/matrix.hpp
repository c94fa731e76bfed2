#ifndef DDRJ_MATRIX_HPP
#define DDRJ_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "ddrj/errors.hpp"

namespace ddrj {

using Vector = std::vector<double>;

//! Row-major dense matrix. Sizes here stay small (designs restricted to the
//! active covariates), so no attempt is made at blocking or vectorization.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const double* row_ptr(std::size_t i) const { return a_.data() + i * cols_; }

  //! Set only after a successful Cholesky factorization of this matrix.
  bool spd() const { return spd_; }
  void mark_spd() { spd_ = true; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vector a_;
  bool spd_ = false;
};

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

//! y = M x
inline Vector matvec(const DenseMatrix& m, const Vector& x) {
  if (x.size() != m.cols()) throw DimensionMismatch("matvec: size mismatch");
  Vector y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

//! y = M^T x
inline Vector tmatvec(const DenseMatrix& m, const Vector& x) {
  if (x.size() != m.rows()) throw DimensionMismatch("tmatvec: size mismatch");
  Vector y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += r[j] * x[i];
  }
  return y;
}

//! M^T M, returned symmetric.
inline DenseMatrix gram(const DenseMatrix& m) {
  DenseMatrix g(m.cols(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (std::size_t k = j; k < m.cols(); ++k) g(j, k) += r[j] * r[k];
  }
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t k = 0; k < j; ++k) g(j, k) = g(k, j);
  return g;
}

//! Lower-triangular Cholesky factor of a symmetric matrix.
//! Throws NotPositiveDefinite when a pivot falls at or below 1e-12.
inline DenseMatrix cholesky(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  if (n != m.cols()) throw DimensionMismatch("cholesky: matrix not square");
  double amax = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      amax = std::max(amax, std::fabs(m(i, j)));
      asym = std::max(asym, std::fabs(m(i, j) - m(j, i)));
    }
  if (amax > 0.0 && asym > 1e-10 * amax)
    throw DimensionMismatch("cholesky: matrix not symmetric");

  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 1e-12) throw NotPositiveDefinite("cholesky: pivot <= 1e-12");
    const double lj = std::sqrt(d);
    l(j, j) = lj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / lj;
    }
  }
  l.mark_spd();
  return l;
}

//! Solve L y = b (forward substitution), L lower triangular.
inline Vector forward_solve(const DenseMatrix& l, const Vector& b) {
  const std::size_t n = l.rows();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  return y;
}

//! Solve L^T x = y (back substitution), L lower triangular.
inline Vector backward_solve(const DenseMatrix& l, const Vector& y) {
  const std::size_t n = l.rows();
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

//! Solve (L L^T) x = b.
inline Vector chol_solve(const DenseMatrix& l, const Vector& b) {
  return backward_solve(l, forward_solve(l, b));
}

//! Inverse of L L^T, computed column by column.
inline DenseMatrix chol_inverse(const DenseMatrix& l) {
  const std::size_t n = l.rows();
  DenseMatrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vector col = chol_solve(l, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  // symmetrize away round-off
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = inv(j, i) = v;
    }
  return inv;
}

//! log det(L L^T)
inline double chol_logdet(const DenseMatrix& l) {
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

}  // namespace ddrj

#endif
