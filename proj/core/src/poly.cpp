#include "gransac/numkit/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gransac::numkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double max_abs_coeff(const PolyD& p) {
  double m = 0.0;
  for (double c : p.c) m = std::max(m, std::abs(c));
  return m;
}

void newton_polish(const PolyD& p, const PolyD& dp, double& r, int steps = 2) {
  for (int i = 0; i < steps; ++i) {
    const double d = dp.eval(r);
    if (std::abs(d) < 1e-300) return;
    const double step = p.eval(r) / d;
    if (!std::isfinite(step)) return;
    const double cand = r - step;
    if (std::abs(p.eval(cand)) <= std::abs(p.eval(r))) r = cand;
  }
}

std::vector<double> roots_quadratic(double c0, double c1, double c2) {
  if (std::abs(c2) < 1e-300) {
    if (std::abs(c1) < 1e-300) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
  std::vector<double> roots;
  if (std::abs(c2) > 0.0) roots.push_back(q / c2);
  if (std::abs(q) > 0.0) roots.push_back(c0 / q);
  if (roots.size() == 2 && roots[0] > roots[1]) std::swap(roots[0], roots[1]);
  if (roots.empty()) roots.push_back(0.0);  // c1 = c0 = 0
  return roots;
}

// ---- balanced Hessenberg double-shift QR (companion eigenvalues) -----------

void balance_in_place(std::vector<double>& a, int n) {
  constexpr double kRadix = 2.0;
  constexpr double kSq = kRadix * kRadix;
  bool done = false;
  int rounds = 0;
  while (!done && rounds++ < 100) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a[j * n + i]);
        r += std::abs(a[i * n + j]);
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / kRadix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= kRadix;
        c *= kSq;
      }
      g = r * kRadix;
      while (c > g) {
        f /= kRadix;
        c /= kSq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        const double ginv = 1.0 / f;
        for (int j = 0; j < n; ++j) a[i * n + j] *= ginv;
        for (int j = 0; j < n; ++j) a[j * n + i] *= f;
      }
    }
  }
}

struct Complex {
  double re, im;
};

// Eigenvalues of an upper Hessenberg matrix, Francis double-shift QR with
// exceptional shifts. Fails past `max_steps` total QR steps.
std::vector<Complex> hqr(std::vector<double> a, int n, int max_steps) {
  std::vector<Complex> out;
  const double eps = std::numeric_limits<double>::epsilon();
  auto at = [&](int i, int j) -> double& { return a[i * n + j]; };

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(at(i, j));
  if (anorm == 0.0) {
    out.assign(n, {0.0, 0.0});
    return out;
  }

  int nn = n - 1;
  double t = 0.0;
  int steps = 0;
  while (nn >= 0) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(at(l - 1, l - 1)) + std::abs(at(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(at(l, l - 1)) <= eps * s) {
          at(l, l - 1) = 0.0;
          break;
        }
      }
      double x = at(nn, nn);
      if (l == nn) {
        out.push_back({x + t, 0.0});
        --nn;
      } else {
        double y = at(nn - 1, nn - 1);
        double w = at(nn, nn - 1) * at(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + (p >= 0.0 ? z : -z);
            out.push_back({x + z, 0.0});
            out.push_back({std::abs(z) > 0.0 ? x - w / z : x + z, 0.0});
          } else {
            out.push_back({x + p, z});
            out.push_back({x + p, -z});
          }
          nn -= 2;
        } else {
          if (++steps > max_steps)
            throw std::runtime_error("roots_companion: eigenvalue iteration did not converge");
          if (its == 10 || its == 20) {
            t += x;
            for (int i = 0; i <= nn; ++i) at(i, i) -= x;
            const double s = std::abs(at(nn, nn - 1)) + std::abs(at(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m;
          double p = 0.0, q = 0.0, r = 0.0;
          for (m = nn - 2; m >= l; --m) {
            double z = at(m, m);
            const double rr = x - z;
            const double ss = y - z;
            p = (rr * ss - w) / at(m + 1, m) + at(m, m + 1);
            q = at(m + 1, m + 1) - z - rr - ss;
            r = at(m + 2, m + 1);
            const double s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(at(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(at(m - 1, m - 1)) + std::abs(z) + std::abs(at(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            at(i, i - 2) = 0.0;
            if (i != m + 2) at(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = at(k, k - 1);
              q = at(k + 1, k - 1);
              r = k != nn - 1 ? at(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = std::sqrt(p * p + q * q + r * r);
            if (p < 0.0) s = -s;
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) at(k, k - 1) = -at(k, k - 1);
            } else {
              at(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            const double y2 = q / s;
            const double z2 = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              double pp = at(k, j) + q * at(k + 1, j);
              if (k != nn - 1) pp += r * at(k + 2, j);
              at(k, j) -= pp * x;
              at(k + 1, j) -= pp * y2;
              if (k != nn - 1) at(k + 2, j) -= pp * z2;
            }
            const int mmin = std::min(nn, k + 3);
            for (int i = l; i <= mmin; ++i) {
              double pp = x * at(i, k) + y2 * at(i, k + 1);
              if (k != nn - 1) pp += z2 * at(i, k + 2);
              at(i, k) -= pp;
              at(i, k + 1) -= pp * q;
              if (k != nn - 1) at(i, k + 2) -= pp * r;
            }
          }
        }
      }
    } while (l < nn - 1 && nn >= 0);
  }
  return out;
}

// Drops near-zero leading coefficients (relative to max|coeff|); returns the
// effective degree, or -1 for the zero polynomial.
int effective_degree(const PolyD& p, double rel_tol) {
  const double scale = max_abs_coeff(p);
  if (scale == 0.0) return -1;
  int d = p.degree();
  while (d > 0 && std::abs(p.c[d]) < rel_tol * scale) --d;
  return std::abs(p.c[d]) < rel_tol * scale ? -1 : d;
}

// Implicit-function partials dr/dc_k = -r^k / p'(r), emitted onto the tape.
std::vector<diff::Var> attach_root_grads(const PolyV& p, const std::vector<double>& roots) {
  diff::Tape* tape = nullptr;
  for (const auto& c : p.c)
    if (c.tape) {
      if (tape && tape != c.tape) throw std::invalid_argument("roots: mixed tapes");
      tape = c.tape;
    }
  std::vector<diff::Var> out;
  out.reserve(roots.size());
  PolyD pv;
  pv.c.reserve(p.c.size());
  for (const auto& c : p.c) pv.c.push_back(c.v);
  const PolyD dpv = pv.derivative();
  for (double r : roots) {
    if (!tape) {
      out.emplace_back(r);
      continue;
    }
    const double dp = dpv.eval(r);
    std::vector<diff::Tape::Edge> edges;
    if (std::abs(dp) > 1e-30) {
      double rk = 1.0;
      for (std::size_t k = 0; k < p.c.size(); ++k) {
        if (!p.c[k].is_const()) edges.push_back({p.c[k].node, -rk / dp});
        rk *= r;
      }
    }
    if (edges.empty()) {
      out.emplace_back(r);
    } else {
      out.emplace_back(r, tape->new_node(std::span<const diff::Tape::Edge>(edges)), tape);
    }
  }
  return out;
}

}  // namespace

std::vector<double> roots_cubic(const PolyD& p) {
  if (p.degree() > 3) throw std::invalid_argument("roots_cubic: degree exceeds 3");
  const double scale = max_abs_coeff(p);
  if (scale == 0.0) return {};
  PolyD q = p;
  q.c.resize(4, 0.0);
  if (std::abs(q.c[3]) < 1e-12 * scale) return roots_quadratic(q.c[0], q.c[1], q.c[2]);

  const double a = q.c[2] / q.c[3];
  const double b = q.c[1] / q.c[3];
  const double c = q.c[0] / q.c[3];
  // Depressed cubic t^3 + pt + r, x = t - a/3.
  const double pp = b - a * a / 3.0;
  const double rr = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = 0.25 * rr * rr + pp * pp * pp / 27.0;

  std::vector<double> roots;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-0.5 * rr + sq);
    const double v = std::cbrt(-0.5 * rr - sq);
    roots.push_back(u + v + shift);
  } else if (pp >= -1e-300) {
    roots.push_back(std::cbrt(-rr) + shift);  // triple / near-triple root
  } else {
    const double m = 2.0 * std::sqrt(-pp / 3.0);
    double arg = 3.0 * rr / (pp * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(theta - 2.0 * kPi * k / 3.0) + shift);
  }

  const PolyD dp = q.derivative();
  for (double& r : roots) newton_polish(q, dp, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<double> roots_companion(const PolyD& p) {
  if (p.degree() > 10) throw std::invalid_argument("roots_companion: degree exceeds 10");
  const int d = effective_degree(p, 1e-12);
  if (d <= 0) return {};
  if (d == 1) return {-p.c[0] / p.c[1]};

  // Companion of the monic polynomial: ones on the subdiagonal, the last
  // column holds -c_i / c_d. Upper Hessenberg as required by hqr.
  std::vector<double> m(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 1; i < d; ++i) m[i * d + (i - 1)] = 1.0;
  for (int i = 0; i < d; ++i) m[i * d + (d - 1)] = -p.c[i] / p.c[d];
  balance_in_place(m, d);
  const std::vector<Complex> eig = hqr(std::move(m), d, 500);

  double rho = 0.0;
  for (const Complex& e : eig) rho = std::max(rho, std::hypot(e.re, e.im));
  const double im_tol = 1e-8 * std::max(rho, 1e-300);

  PolyD q;
  q.c.assign(p.c.begin(), p.c.begin() + d + 1);
  const PolyD dq = q.derivative();
  std::vector<double> roots;
  for (const Complex& e : eig) {
    if (std::abs(e.im) >= im_tol) continue;
    double r = e.re;
    newton_polish(q, dq, r);
    roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<diff::Var> roots_cubic(const PolyV& p) {
  PolyD pv;
  pv.c.reserve(p.c.size());
  for (const auto& c : p.c) pv.c.push_back(c.v);
  return attach_root_grads(p, roots_cubic(pv));
}

std::vector<diff::Var> roots_companion(const PolyV& p) {
  PolyD pv;
  pv.c.reserve(p.c.size());
  for (const auto& c : p.c) pv.c.push_back(c.v);
  return attach_root_grads(p, roots_companion(pv));
}

}  // namespace gransac::numkit
