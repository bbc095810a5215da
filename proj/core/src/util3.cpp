#include "gransac/numkit/util3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gransac::numkit {

Eig3 eig3_sym(const MatD& a) {
  if (a.rows() != 3 || a.cols() != 3) throw std::invalid_argument("eig3_sym: expects 3x3");
  MatD m = a;
  MatD v = MatD::identity(3);
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(m(p, q)) < 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int k = 0; k < 3; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < 3; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  Eig3 out;
  int order[3] = {0, 1, 2};
  std::sort(order, order + 3, [&](int i, int j) { return m(i, i) > m(j, j); });
  out.vectors = MatD(3, 3);
  for (int c = 0; c < 3; ++c) {
    out.values[c] = m(order[c], order[c]);
    for (int r = 0; r < 3; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

Qr qr(const MatD& a) {
  const int m = a.rows();
  const int n = a.cols();
  MatD r = a;
  MatD q = MatD::identity(m);
  for (int k = 0; k < std::min(m - 1, n); ++k) {
    double norm = 0.0;
    for (int i = k; i < m; ++i) norm += r(i, k) * r(i, k);
    norm = std::sqrt(norm);
    if (norm < 1e-300) continue;
    const double alpha = r(k, k) >= 0.0 ? -norm : norm;
    std::vector<double> w(m, 0.0);
    w[k] = r(k, k) - alpha;
    for (int i = k + 1; i < m; ++i) w[i] = r(i, k);
    double wn = 0.0;
    for (int i = k; i < m; ++i) wn += w[i] * w[i];
    if (wn < 1e-300) continue;
    const double beta = 2.0 / wn;
    for (int j = 0; j < n; ++j) {
      double d = 0.0;
      for (int i = k; i < m; ++i) d += w[i] * r(i, j);
      d *= beta;
      for (int i = k; i < m; ++i) r(i, j) -= d * w[i];
    }
    for (int j = 0; j < m; ++j) {
      double d = 0.0;
      for (int i = k; i < m; ++i) d += w[i] * q(j, i);
      d *= beta;
      for (int i = k; i < m; ++i) q(j, i) -= d * w[i];
    }
  }
  // Nonnegative diagonal of r.
  for (int k = 0; k < std::min(m, n); ++k) {
    if (r(k, k) < 0.0) {
      for (int j = 0; j < n; ++j) r(k, j) = -r(k, j);
      for (int i = 0; i < m; ++i) q(i, k) = -q(i, k);
    }
  }
  return {std::move(q), std::move(r)};
}

Rq3 rq3(const MatD& a) {
  if (a.rows() != 3 || a.cols() != 3) throw std::invalid_argument("rq3: expects 3x3");
  MatD r = a;
  MatD q = MatD::identity(3);

  // Apply the Givens rotation G on columns (i, j) of r (r <- r * G) and
  // accumulate G^T into q from the left so that a = r * q stays invariant.
  auto givens_right = [&](int i, int j, double c, double s) {
    for (int k = 0; k < 3; ++k) {
      const double ri = r(k, i), rj = r(k, j);
      r(k, i) = c * ri - s * rj;
      r(k, j) = s * ri + c * rj;
    }
    for (int k = 0; k < 3; ++k) {
      const double qi = q(i, k), qj = q(j, k);
      q(i, k) = c * qi - s * qj;
      q(j, k) = s * qi + c * qj;
    }
  };

  // Zero r(row, col) by rotating columns (col, pivot_col).
  auto zero_entry = [&](int row, int col, int pivot_col) {
    const double x = r(row, pivot_col);
    const double y = r(row, col);
    const double h = std::hypot(x, y);
    if (h < 1e-300) return;
    givens_right(col, pivot_col, x / h, y / h);
  };
  zero_entry(2, 1, 2);
  zero_entry(2, 0, 2);
  zero_entry(1, 0, 1);

  // Positive diagonal on the first two entries; the third flips only
  // together with det(q) so that q always stays a proper rotation.
  for (int k = 0; k < 2; ++k) {
    if (r(k, k) < 0.0) {
      for (int j = 0; j <= k; ++j) r(j, k) = -r(j, k);
      for (int j = 0; j < 3; ++j) q(k, j) = -q(k, j);
    }
  }
  if (det3(q) < 0.0) {
    for (int j = 0; j < 3; ++j) r(j, 2) = -r(j, 2);
    for (int j = 0; j < 3; ++j) q(2, j) = -q(2, j);
  }
  return {std::move(r), std::move(q)};
}

}  // namespace gransac::numkit
