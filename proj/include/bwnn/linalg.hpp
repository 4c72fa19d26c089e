#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bwnn {

// Row-major dense matrix. Desk-scale only; no views, no expression templates.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Solves (A + ridge*I) x = b for symmetric positive definite A, in-place Cholesky.
std::vector<double> cholesky_solve(Matrix a, std::vector<double> b, double ridge = 0.0);

// All eigenvalues of a symmetric matrix (cyclic Jacobi); ascending order.
std::vector<double> symmetric_eigenvalues(Matrix a);

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a);

}  // namespace bwnn
