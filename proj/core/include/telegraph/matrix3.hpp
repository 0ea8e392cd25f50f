#pragma once

#include <array>

#include "telegraph/state_model.hpp"

namespace telegraph {

/// Row-major 3x3 matrix acting on column vectors: (M p)_i = sum_j M(i, j) p_j.
/// Propagators and pulse matrices are column-stochastic.
struct Matrix3 {
  std::array<double, 9> m{};

  double operator()(int row, int col) const { return m[static_cast<std::size_t>(3 * row + col)]; }
  double& operator()(int row, int col) { return m[static_cast<std::size_t>(3 * row + col)]; }

  static Matrix3 identity();

  friend bool operator==(const Matrix3&, const Matrix3&) = default;
};

Matrix3 operator*(const Matrix3& a, const Matrix3& b);
Matrix3 operator+(const Matrix3& a, const Matrix3& b);
Matrix3 operator*(double s, const Matrix3& a);
std::array<double, 3> operator*(const Matrix3& a, const std::array<double, 3>& v);

/// Maximum absolute column sum.
double norm1(const Matrix3& a);

/// Largest |column sum - 1| over the three columns.
double column_sum_defect(const Matrix3& a);

/// exp(a) by scaling and squaring of a truncated Taylor series.
Matrix3 expm(const Matrix3& a);

}  // namespace telegraph
