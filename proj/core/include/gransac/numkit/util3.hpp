#pragma once

#include "gransac/numkit/mat.hpp"

namespace gransac::numkit {

// Eigen-decomposition of a symmetric 3x3 matrix (cyclic Jacobi).
// Eigenvalues descending, eigenvectors as columns of `vectors`.
struct Eig3 {
  Vec3<double> values;
  MatD vectors;
};
Eig3 eig3_sym(const MatD& a);

// Householder QR, a = q * r with q rows x rows orthogonal and r upper
// trapezoidal. Diagonal of r is made nonnegative.
struct Qr {
  MatD q;
  MatD r;
};
Qr qr(const MatD& a);

// RQ decomposition of a 3x3 matrix: a = r * q with r upper triangular
// (positive diagonal) and q a rotation.
struct Rq3 {
  MatD r;
  MatD q;
};
Rq3 rq3(const MatD& a);

}  // namespace gransac::numkit
