// Hermitian positive-definite kernels: Cholesky factorization, log-determinant,
// quadratic/sandwich forms and Sherman-Morrison rank-one inverse updates.
#pragma once

#include <span>

#include "covact/complex_matrix.hpp"

namespace covact {

// sum_i conj(x_i) * y_i
cxd dot_conj(std::span<const cxd> x, std::span<const cxd> y);

// y = A x
void matvec(const ComplexMatrix& a, std::span<const cxd> x, std::span<cxd> y);
ComplexVector matvec(const ComplexMatrix& a, std::span<const cxd> x);

// Lower-triangular Cholesky factor of a Hermitian PD matrix.
// Throws NotPositiveDefinite on a non-positive pivot; no pivoting, no
// silent regularization.
ComplexMatrix cholesky_factor(const ComplexMatrix& a);

// log|A| = 2 sum_i log l_ii from the Cholesky factor.
double cholesky_logdet(const ComplexMatrix& a);
double logdet_from_factor(const ComplexMatrix& chol);

// Solve A x = b in place given the Cholesky factor of A.
void cholesky_solve_in_place(const ComplexMatrix& chol, std::span<cxd> b);

// Full inverse via Cholesky solves against identity columns; result is
// re-symmetrized.
ComplexMatrix cholesky_inverse(const ComplexMatrix& a);

// x^H A x as a real scalar. A must be Hermitian; the imaginary part of the
// raw result is discarded after a cheap sanity check.
double quadratic_form(std::span<const cxd> x, const ComplexMatrix& a);

// x^H A B A x = (A x)^H B (A x)
double sandwich_form(std::span<const cxd> x, const ComplexMatrix& a,
                     const ComplexMatrix& b);

// Ainv <- (A + d s s^H)^{-1} where A = Ainv^{-1} (Sherman-Morrison).
// Both triangles are rewritten from one computation so Hermitian symmetry
// cannot drift. Throws SingularUpdate if 1 + d s^H Ainv s <= 1e-14.
void rank_one_inverse_update(ComplexMatrix& ainv, std::span<const cxd> s,
                             double d);

// Same update with u = Ainv s and gamma = s^H Ainv s already at hand
// (they fall out of the coordinate statistics).
void rank_one_inverse_update_with(ComplexMatrix& ainv, std::span<const cxd> u,
                                  double gamma, double d);

}  // namespace covact
