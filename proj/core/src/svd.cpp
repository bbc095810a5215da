#include "gransac/numkit/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gransac::numkit {

namespace {

// Greedily extends `basis` (m x g, orthonormal columns) to a full m x m
// orthonormal matrix. Candidates are the canonical unit vectors; at every
// step the one with the largest residual after projection wins (lowest index
// on ties), which keeps the completion deterministic.
MatD complete_orthonormal(const MatD& basis, int m) {
  const int g = basis.cols();
  MatD q(m, m);
  for (int c = 0; c < g; ++c)
    for (int r = 0; r < m; ++r) q(r, c) = basis(r, c);

  std::vector<std::vector<double>> residuals(m, std::vector<double>(m, 0.0));
  for (int e = 0; e < m; ++e) residuals[e][e] = 1.0;
  std::vector<bool> used(m, false);

  auto project_out = [&](std::vector<double>& x, int upto) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int c = 0; c < upto; ++c) {
        double d = 0.0;
        for (int r = 0; r < m; ++r) d += x[r] * q(r, c);
        for (int r = 0; r < m; ++r) x[r] -= d * q(r, c);
      }
    }
  };

  for (int c = g; c < m; ++c) {
    int best = -1;
    double best_norm = -1.0;
    for (int e = 0; e < m; ++e) {
      if (used[e]) continue;
      std::vector<double> x = residuals[e];
      project_out(x, c);
      double n2 = 0.0;
      for (double xi : x) n2 += xi * xi;
      if (n2 > best_norm + 1e-15) {
        best_norm = n2;
        best = e;
        residuals[e] = x;
      }
    }
    if (best < 0 || best_norm <= 0.0) throw std::runtime_error("svd: orthonormal completion failed");
    used[best] = true;
    const double inv = 1.0 / std::sqrt(best_norm);
    for (int r = 0; r < m; ++r) q(r, c) = residuals[best][r] * inv;
  }
  return q;
}

// One-sided Jacobi on a tall matrix (rows >= cols). Returns w = a * v with
// orthogonal columns and the accumulated rotations v.
void jacobi_tall(MatD& w, MatD& v) {
  const int m = w.rows();
  const int n = w.cols();
  v = MatD::identity(n);
  constexpr double kTol = 1e-15;
  constexpr int kMaxSweeps = 60;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < m; ++i) {
          alpha += w(i, p) * w(i, p);
          beta += w(i, q) * w(i, q);
          gamma += w(i, p) * w(i, q);
        }
        const double scale = std::sqrt(alpha * beta);
        if (scale == 0.0 || std::abs(gamma) <= kTol * scale) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (int i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (converged) return;
  }
  throw std::runtime_error("svd: one-sided Jacobi did not converge within 60 sweeps");
}

Svd<double> svd_tall(const MatD& a) {
  const int m = a.rows();
  const int n = a.cols();
  MatD w = a;
  MatD v;
  jacobi_tall(w, v);

  std::vector<double> sigma(n, 0.0);
  for (int c = 0; c < n; ++c) {
    double s2 = 0.0;
    for (int r = 0; r < m; ++r) s2 += w(r, c) * w(r, c);
    sigma[c] = std::sqrt(s2);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return sigma[i] > sigma[j]; });

  Svd<double> out;
  out.s.resize(n);
  out.v = MatD(n, n);
  MatD u_cols(m, n);
  const double sigma_max = sigma[order[0]];
  int good = 0;
  for (int c = 0; c < n; ++c) {
    const int src = order[c];
    out.s[c] = sigma[src];
    for (int r = 0; r < n; ++r) out.v(r, c) = v(r, src);
    if (sigma[src] > sigma_max * 1e-14 && sigma[src] > 0.0) {
      for (int r = 0; r < m; ++r) u_cols(r, c) = w(r, src) / sigma[src];
      ++good;
    }
  }
  // Columns past `good` (tiny sigma) and the m-n tail are completed to a full
  // orthonormal u.
  MatD u_good(m, good);
  for (int c = 0; c < good; ++c)
    for (int r = 0; r < m; ++r) u_good(r, c) = u_cols(r, c);
  out.u = complete_orthonormal(u_good, m);

  // Canonical signs, driven by v, paired with u for c < n.
  for (int c = 0; c < n; ++c) {
    int arg = 0;
    double best = -1.0;
    for (int r = 0; r < n; ++r) {
      const double mag = std::abs(out.v(r, c));
      if (mag > best + 1e-18) {
        best = mag;
        arg = r;
      }
    }
    if (out.v(arg, c) < 0.0) {
      for (int r = 0; r < n; ++r) out.v(r, c) = -out.v(r, c);
      for (int r = 0; r < m; ++r) out.u(r, c) = -out.u(r, c);
    }
  }
  for (int c = n; c < m; ++c) {
    int arg = 0;
    double best = -1.0;
    for (int r = 0; r < m; ++r) {
      const double mag = std::abs(out.u(r, c));
      if (mag > best + 1e-18) {
        best = mag;
        arg = r;
      }
    }
    if (out.u(arg, c) < 0.0)
      for (int r = 0; r < m; ++r) out.u(r, c) = -out.u(r, c);
  }
  return out;
}

}  // namespace

Svd<double> svd(const MatD& a) {
  if (a.rows() < 1 || a.cols() < 1) throw std::invalid_argument("svd: empty matrix");
  for (double x : a.data())
    if (!std::isfinite(x)) throw std::invalid_argument("svd: non-finite entry");
  if (a.rows() >= a.cols()) return svd_tall(a);
  Svd<double> t = svd_tall(transpose(a));
  return {t.v, std::move(t.s), t.u};
}

namespace {

// Partials of U, S, V entries with respect to every input entry via the
// first-order perturbation of the SVD. The symmetric part of the off-diagonal
// coupling carries the 1/(sigma_j - sigma_i) factor; when a pair is closer
// than 1e-10 * sigma_max that term is dropped (it rotates within a degenerate
// cluster and cancels in any gauge-invariant function of the factors).
struct SvdPartials {
  // Layout: [output_index][input_index], input index = c * n + d.
  std::vector<std::vector<double>> du, ds, dv;
};

SvdPartials svd_partials(const Svd<double>& f, int m, int n) {
  const int r = std::min(m, n);
  const int mn = m * n;
  SvdPartials out;
  out.du.assign(m * m, std::vector<double>(mn, 0.0));
  out.ds.assign(r, std::vector<double>(mn, 0.0));
  out.dv.assign(n * n, std::vector<double>(mn, 0.0));

  const double smax = f.s.empty() ? 0.0 : f.s[0];
  const double guard = 1e-10 * std::max(smax, 1e-300);

  std::vector<double> omega_u(m * m), omega_v(n * n);
  for (int c = 0; c < m; ++c) {
    for (int d = 0; d < n; ++d) {
      const int in = c * n + d;
      std::fill(omega_u.begin(), omega_u.end(), 0.0);
      std::fill(omega_v.begin(), omega_v.end(), 0.0);

      // P_ij = u_ci * v_dj for i < m, j < n.
      for (int i = 0; i < r; ++i) {
        out.ds[i][in] = f.u(c, i) * f.v(d, i);
        for (int j = i + 1; j < r; ++j) {
          const double pij = f.u(c, i) * f.v(d, j);
          const double pji = f.u(c, j) * f.v(d, i);
          const double diff_s = f.s[j] - f.s[i];
          const double sum_s = f.s[j] + f.s[i];
          const double sym = std::abs(diff_s) > guard ? 0.5 * (pij + pji) / diff_s : 0.0;
          const double asym = sum_s > guard ? 0.5 * (pij - pji) / sum_s : 0.0;
          const double ou = sym + asym;
          const double ov = sym - asym;
          omega_u[i * m + j] = ou;
          omega_u[j * m + i] = -ou;
          omega_v[i * n + j] = ov;
          omega_v[j * n + i] = -ov;
        }
        // Extra v columns (n > m): coupling to the null block.
        for (int j = r; j < n; ++j) {
          const double ov = f.s[i] > guard ? -(f.u(c, i) * f.v(d, j)) / f.s[i] : 0.0;
          omega_v[i * n + j] = ov;
          omega_v[j * n + i] = -ov;
        }
      }
      // Extra u columns (m > n): coupling to the null block.
      for (int q = r; q < m; ++q) {
        for (int j = 0; j < r; ++j) {
          const double ou = f.s[j] > guard ? (f.u(c, q) * f.v(d, j)) / f.s[j] : 0.0;
          omega_u[q * m + j] = ou;
          omega_u[j * m + q] = -ou;
        }
      }

      for (int a2 = 0; a2 < m; ++a2)
        for (int b = 0; b < m; ++b) {
          double acc = 0.0;
          for (int k = 0; k < m; ++k) acc += f.u(a2, k) * omega_u[k * m + b];
          if (acc != 0.0) out.du[a2 * m + b][in] = acc;
        }
      for (int a2 = 0; a2 < n; ++a2)
        for (int b = 0; b < n; ++b) {
          double acc = 0.0;
          for (int k = 0; k < n; ++k) acc += f.v(a2, k) * omega_v[k * n + b];
          if (acc != 0.0) out.dv[a2 * n + b][in] = acc;
        }
    }
  }
  return out;
}

diff::Var emit(diff::Tape* tape, double value, const std::vector<double>& partials,
               const std::vector<int>& nodes) {
  if (!tape) return diff::Var(value);
  std::vector<diff::Tape::Edge> edges;
  for (std::size_t i = 0; i < partials.size(); ++i)
    if (nodes[i] >= 0 && partials[i] != 0.0) edges.push_back({nodes[i], partials[i]});
  if (edges.empty()) return diff::Var(value);
  return diff::Var(value, tape->new_node(std::span<const diff::Tape::Edge>(edges)), tape);
}

}  // namespace

Svd<diff::Var> svd(const MatV& a) {
  const int m = a.rows();
  const int n = a.cols();
  const MatD av = values_of(a);
  const Svd<double> f = svd(av);
  const int r = std::min(m, n);

  diff::Tape* tape = nullptr;
  std::vector<int> nodes(m * n, -1);
  for (int i = 0; i < m * n; ++i) {
    const diff::Var& x = a.data()[i];
    nodes[i] = x.node;
    if (x.tape) {
      if (tape && tape != x.tape) throw std::invalid_argument("svd: mixed tapes");
      tape = x.tape;
    }
  }

  Svd<diff::Var> out;
  out.u = MatV(m, m);
  out.v = MatV(n, n);
  out.s.resize(r);
  if (!tape) {
    for (int i = 0; i < m * m; ++i) out.u.data()[i] = f.u.data()[i];
    for (int i = 0; i < n * n; ++i) out.v.data()[i] = f.v.data()[i];
    for (int i = 0; i < r; ++i) out.s[i] = f.s[i];
    return out;
  }

  const SvdPartials p = svd_partials(f, m, n);
  for (int i = 0; i < m * m; ++i) out.u.data()[i] = emit(tape, f.u.data()[i], p.du[i], nodes);
  for (int i = 0; i < n * n; ++i) out.v.data()[i] = emit(tape, f.v.data()[i], p.dv[i], nodes);
  for (int i = 0; i < r; ++i) out.s[i] = emit(tape, f.s[i], p.ds[i], nodes);
  return out;
}

namespace {

template <typename T>
NullSpace<T> null_space_impl(const Svd<T>& f, int cols, int dim) {
  if (dim < 1 || dim > cols) throw std::invalid_argument("null_space: bad dim");
  NullSpace<T> out;
  out.basis = Mat<T>(cols, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < cols; ++r) out.basis(r, c) = f.v(r, cols - dim + c);

  // Effective singular values: jacobi values padded with structural zeros.
  const int nsv = static_cast<int>(f.s.size());
  auto sigma_at = [&](int i) { return i < nsv ? diff::value_of(f.s[i]) : 0.0; };
  const double smax = sigma_at(0);
  const int first_kept = cols - dim;
  if (first_kept == 0) {
    out.degenerate = false;
    out.gap = smax;
    return out;
  }
  out.gap = sigma_at(first_kept - 1) - sigma_at(first_kept);
  out.degenerate = out.gap < 1e-14 * smax;
  return out;
}

}  // namespace

NullSpace<double> null_space(const MatD& a, int dim) {
  if (a.cols() < dim) throw std::invalid_argument("null_space: dim exceeds cols");
  return null_space_impl(svd(a), a.cols(), dim);
}

NullSpace<diff::Var> null_space(const MatV& a, int dim) {
  if (a.cols() < dim) throw std::invalid_argument("null_space: dim exceeds cols");
  return null_space_impl(svd(a), a.cols(), dim);
}

}  // namespace gransac::numkit
