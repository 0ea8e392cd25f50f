#include "telegraph/matrix3.hpp"

#include <algorithm>
#include <cmath>

namespace telegraph {

Matrix3 Matrix3::identity() {
  Matrix3 i;
  i(0, 0) = i(1, 1) = i(2, 2) = 1.0;
  return i;
}

Matrix3 operator*(const Matrix3& a, const Matrix3& b) {
  Matrix3 c;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix3 operator+(const Matrix3& a, const Matrix3& b) {
  Matrix3 c;
  for (std::size_t i = 0; i < 9; ++i) c.m[i] = a.m[i] + b.m[i];
  return c;
}

Matrix3 operator*(double s, const Matrix3& a) {
  Matrix3 c;
  for (std::size_t i = 0; i < 9; ++i) c.m[i] = s * a.m[i];
  return c;
}

std::array<double, 3> operator*(const Matrix3& a, const std::array<double, 3>& v) {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = a(i, 0) * v[0] + a(i, 1) * v[1] + a(i, 2) * v[2];
  }
  return out;
}

double norm1(const Matrix3& a) {
  double best = 0.0;
  for (int j = 0; j < 3; ++j) {
    best = std::max(best, std::abs(a(0, j)) + std::abs(a(1, j)) + std::abs(a(2, j)));
  }
  return best;
}

double column_sum_defect(const Matrix3& a) {
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) {
    worst = std::max(worst, std::abs(a(0, j) + a(1, j) + a(2, j) - 1.0));
  }
  return worst;
}

Matrix3 expm(const Matrix3& a) {
  // Scale to norm <= 1/2, where 20 Taylor terms are far below double epsilon.
  int squarings = 0;
  const double n = norm1(a);
  if (n > 0.5) squarings = static_cast<int>(std::ceil(std::log2(n / 0.5)));
  const Matrix3 scaled = std::ldexp(1.0, -squarings) * a;

  Matrix3 term = Matrix3::identity();
  Matrix3 sum = Matrix3::identity();
  for (int k = 1; k <= 20; ++k) {
    term = (1.0 / k) * (term * scaled);
    sum = sum + term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace telegraph
