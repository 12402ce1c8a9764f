#include "covact/hermitian.hpp"

#include <cassert>
#include <cmath>

namespace covact {

cxd dot_conj(std::span<const cxd> x, std::span<const cxd> y) {
  if (x.size() != y.size()) throw DimensionMismatch("dot_conj: length mismatch");
  cxd s{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

void matvec(const ComplexMatrix& a, std::span<const cxd> x, std::span<cxd> y) {
  if (a.cols() != x.size() || a.rows() != y.size())
    throw DimensionMismatch("matvec: shape mismatch");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cxd s{0.0, 0.0};
    const cxd* row = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

ComplexVector matvec(const ComplexMatrix& a, std::span<const cxd> x) {
  ComplexVector y(a.rows());
  matvec(a, x, y);
  return y;
}

ComplexMatrix cholesky_factor(const ComplexMatrix& a) {
  if (!a.is_square()) throw DimensionMismatch("cholesky_factor: not square");
  const std::size_t n = a.rows();
  ComplexMatrix l(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    double diag = a(k, k).real();
    for (std::size_t m = 0; m < k; ++m) diag -= std::norm(l(k, m));
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw NotPositiveDefinite("cholesky_factor: pivot " + std::to_string(k) +
                                " not positive");
    const double lkk = std::sqrt(diag);
    l(k, k) = lkk;
    for (std::size_t i = k + 1; i < n; ++i) {
      cxd s = a(i, k);
      for (std::size_t m = 0; m < k; ++m) s -= l(i, m) * std::conj(l(k, m));
      l(i, k) = s / lkk;
    }
  }
  return l;
}

double logdet_from_factor(const ComplexMatrix& chol) {
  double s = 0.0;
  for (std::size_t i = 0; i < chol.rows(); ++i) s += std::log(chol(i, i).real());
  return 2.0 * s;
}

double cholesky_logdet(const ComplexMatrix& a) {
  return logdet_from_factor(cholesky_factor(a));
}

void cholesky_solve_in_place(const ComplexMatrix& chol, std::span<cxd> b) {
  const std::size_t n = chol.rows();
  if (b.size() != n) throw DimensionMismatch("cholesky_solve: length mismatch");
  // forward: L y = b
  for (std::size_t i = 0; i < n; ++i) {
    cxd s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol(i, j) * b[j];
    b[i] = s / chol(i, i).real();
  }
  // backward: L^H x = y
  for (std::size_t ii = n; ii-- > 0;) {
    cxd s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= std::conj(chol(j, ii)) * b[j];
    b[ii] = s / chol(ii, ii).real();
  }
}

ComplexMatrix cholesky_inverse(const ComplexMatrix& a) {
  const ComplexMatrix l = cholesky_factor(a);
  const std::size_t n = a.rows();
  ComplexMatrix inv(n, n);
  ComplexVector col(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::fill(col.begin(), col.end(), cxd{0.0, 0.0});
    col[c] = 1.0;
    cholesky_solve_in_place(l, col);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  re_symmetrize(inv);
  return inv;
}

double quadratic_form(std::span<const cxd> x, const ComplexMatrix& a) {
  if (a.cols() != x.size()) throw DimensionMismatch("quadratic_form: shape mismatch");
  const ComplexVector v = matvec(a, x);
  const cxd z = dot_conj(x, v);
  assert(std::abs(z.imag()) < 1e-8 * std::abs(z.real()) + 1e-12);
  return z.real();
}

double sandwich_form(std::span<const cxd> x, const ComplexMatrix& a,
                     const ComplexMatrix& b) {
  if (a.cols() != x.size() || b.cols() != a.rows())
    throw DimensionMismatch("sandwich_form: shape mismatch");
  const ComplexVector v = matvec(a, x);
  return quadratic_form(v, b);
}

void rank_one_inverse_update_with(ComplexMatrix& ainv, std::span<const cxd> u,
                                  double gamma, double d) {
  if (d == 0.0) return;
  const double denom = 1.0 + d * gamma;
  if (!(denom > 1e-14))
    throw SingularUpdate("rank_one_inverse_update: denominator " +
                         std::to_string(denom));
  const double coef = d / denom;
  const std::size_t n = ainv.rows();
  for (std::size_t i = 0; i < n; ++i) {
    ainv(i, i) = cxd(ainv(i, i).real() - coef * std::norm(u[i]), 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      const cxd val = ainv(i, j) - coef * u[i] * std::conj(u[j]);
      ainv(i, j) = val;
      ainv(j, i) = std::conj(val);
    }
  }
}

void rank_one_inverse_update(ComplexMatrix& ainv, std::span<const cxd> s,
                             double d) {
  if (ainv.cols() != s.size())
    throw DimensionMismatch("rank_one_inverse_update: shape mismatch");
  if (d == 0.0) return;
  const ComplexVector u = matvec(ainv, s);
  const double gamma = dot_conj(s, u).real();
  rank_one_inverse_update_with(ainv, u, gamma, d);
}

}  // namespace covact
