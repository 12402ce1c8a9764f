#include "covact/complex_matrix.hpp"

#include <algorithm>
#include <cmath>

namespace covact {

bool ComplexMatrix::is_hermitian(double rel_tol) const {
  if (!is_square()) return false;
  double scale = 0.0;
  for (const auto& z : data_) scale = std::max(scale, std::abs(z));
  const double tol = rel_tol * std::max(scale, 1e-300);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i; j < cols_; ++j) {
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    }
  }
  return true;
}

void re_symmetrize(ComplexMatrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = cxd(a(i, i).real(), 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      const cxd avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.data()[i]);
  return std::sqrt(s);
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.data()[i] - b.data()[i]);
  return std::sqrt(s);
}

}  // namespace covact
