#pragma once

#include <vector>

#include "gransac/diff/tape.hpp"
#include "gransac/numkit/mat.hpp"

namespace gransac::numkit {

// Full SVD: a = u * diag(s) * v^T with u rows x rows, v cols x cols, s of
// length min(rows, cols) sorted descending. Singular vector signs are fixed
// so the largest-magnitude entry of each right singular vector is positive
// (lowest index on ties); u columns flip together with their v partner.
template <typename T>
struct Svd {
  Mat<T> u;
  std::vector<T> s;
  Mat<T> v;
};

// One-sided Jacobi, capped at 60 sweeps; throws std::runtime_error when the
// cap is hit (ill-conditioned input).
Svd<double> svd(const MatD& a);

// Same factorization computed on the values, with first-order perturbation
// partials recorded on the tape. Degenerate singular-value pairs use the
// guarded convention: the divergent (gauge) term is dropped, the regular term
// is kept, so gradients of gauge-invariant downstream quantities stay exact.
Svd<diff::Var> svd(const MatV& a);

template <typename T>
struct NullSpace {
  Mat<T> basis;      // cols x dim, unit columns
  bool degenerate;   // kept/discarded singular value gap below 1e-14 * sigma_max
  double gap;        // that gap, for diagnostics
};

NullSpace<double> null_space(const MatD& a, int dim);
NullSpace<diff::Var> null_space(const MatV& a, int dim);

}  // namespace gransac::numkit
