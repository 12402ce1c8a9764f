// Dense complex matrix/vector storage used throughout the library.
//
// Matrices are row-major. Hermitian matrices store the full square (L stays
// small here, at most a few dozen), and the update routines always write both
// triangles so Hermitian symmetry survives long update sequences.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "covact/errors.hpp"

namespace covact {

using cxd = std::complex<double>;
using ComplexVector = std::vector<cxd>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ComplexMatrix identity(std::size_t n) { return scaled_identity(n, 1.0); }

  static ComplexMatrix scaled_identity(std::size_t n, double s) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = s;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cxd& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cxd& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<cxd> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const cxd> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  cxd* data() { return data_.data(); }
  const cxd* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  bool is_square() const { return rows_ == cols_; }

  bool is_hermitian(double rel_tol = 1e-10) const;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  ComplexVector data_;
};

// a <- (a + a^H) / 2
void re_symmetrize(ComplexMatrix& a);

double frobenius_norm(const ComplexMatrix& a);
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace covact
