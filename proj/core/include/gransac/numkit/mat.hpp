#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "gransac/diff/tape.hpp"

namespace gransac::numkit {

// Dense row-major matrix over double or diff::Var. Sizes in this project stay
// tiny (<= 12x20), so everything is by value and unoptimized on purpose.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols, T(0.0)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Mat: negative size");
  }
  Mat(int rows, int cols, std::initializer_list<T> values) : Mat(rows, cols) {
    if (values.size() != d_.size()) throw std::invalid_argument("Mat: initializer size mismatch");
    std::size_t i = 0;
    for (const T& v : values) d_[i++] = v;
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return d_.empty(); }

  T& operator()(int r, int c) { return d_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return d_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::vector<T>& data() { return d_; }
  const std::vector<T>& data() const { return d_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> d_;
};

using MatD = Mat<double>;
using MatV = Mat<diff::Var>;

template <typename T>
Mat<T> operator*(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Mat: size mismatch in product");
  Mat<T> c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <typename T>
Mat<T> operator+(const Mat<T>& a, const Mat<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("Mat: size mismatch");
  Mat<T> c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
  return c;
}

template <typename T>
Mat<T> operator-(const Mat<T>& a, const Mat<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("Mat: size mismatch");
  Mat<T> c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

template <typename T, typename S>
Mat<T> operator*(const Mat<T>& a, const S& s) {
  Mat<T> c = a;
  for (auto& x : c.data()) x = x * s;
  return c;
}

template <typename T>
Mat<T> transpose(const Mat<T>& a) {
  Mat<T> t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

template <typename T>
T frobenius_norm_sq(const Mat<T>& a) {
  T s(0.0);
  for (const T& x : a.data()) s += x * x;
  return s;
}

template <typename T>
T frobenius_norm(const Mat<T>& a) {
  using std::sqrt;
  using diff::sqrt;
  return sqrt(frobenius_norm_sq(a));
}

inline double max_abs(const MatD& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

template <typename T>
MatD values_of(const Mat<T>& a) {
  MatD m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) m.data()[i] = diff::value_of(a.data()[i]);
  return m;
}

// 3-vector helpers shared by the geometry code.
template <typename T>
using Vec3 = std::array<T, 3>;

template <typename T>
Vec3<T> cross3(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <typename T>
T dot3(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <typename T>
T norm3(const Vec3<T>& a) {
  using std::sqrt;
  using diff::sqrt;
  return sqrt(dot3(a, a));
}

template <typename T>
T det3(const Mat<T>& m) {
  if (m.rows() != 3 || m.cols() != 3) throw std::invalid_argument("det3: expects 3x3");
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Determinant of the 3x3 matrix with the given columns; used for polynomial
// determinant expansions.
template <typename T>
T det3_cols(const Vec3<T>& c0, const Vec3<T>& c1, const Vec3<T>& c2) {
  return c0[0] * (c1[1] * c2[2] - c2[1] * c1[2]) - c1[0] * (c0[1] * c2[2] - c2[1] * c0[2]) +
         c2[0] * (c0[1] * c1[2] - c1[1] * c0[2]);
}

template <typename T>
Mat<T> mat3_from_vec9(std::span<const T> v) {
  if (v.size() != 9) throw std::invalid_argument("mat3_from_vec9: expects 9 values");
  Mat<T> m(3, 3);
  for (int i = 0; i < 9; ++i) m.data()[i] = v[i];
  return m;
}

template <typename T>
Vec3<T> mat3_mul_vec(const Mat<T>& m, const Vec3<T>& x) {
  return {m(0, 0) * x[0] + m(0, 1) * x[1] + m(0, 2) * x[2],
          m(1, 0) * x[0] + m(1, 1) * x[1] + m(1, 2) * x[2],
          m(2, 0) * x[0] + m(2, 1) * x[1] + m(2, 2) * x[2]};
}

}  // namespace gransac::numkit
