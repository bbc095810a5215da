#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gransac/diff/grad_check.hpp"
#include "gransac/diff/tape.hpp"
#include "gransac/numkit/mat.hpp"
#include "gransac/numkit/poly.hpp"
#include "gransac/numkit/svd.hpp"
#include "gransac/numkit/util3.hpp"
#include "gransac/rng.hpp"

using gransac::Rng;
using gransac::diff::Tape;
using gransac::diff::Var;
using namespace gransac::numkit;

namespace {

MatD random_mat(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  MatD m(r, c);
  for (auto& x : m.data()) x = rng.uniform(lo, hi);
  return m;
}

double recon_err(const MatD& a, const Svd<double>& f) {
  MatD s(a.rows(), a.cols());
  for (std::size_t i = 0; i < f.s.size(); ++i) s(static_cast<int>(i), static_cast<int>(i)) = f.s[i];
  const MatD r = f.u * s * transpose(f.v);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - r.data()[i];
    num += d * d;
    den += a.data()[i] * a.data()[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

double ortho_err(const MatD& q) {
  const MatD g = transpose(q) * q;
  double err = 0.0;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) err += std::pow(g(i, j) - (i == j ? 1.0 : 0.0), 2);
  return std::sqrt(err);
}

PolyD poly_from_roots(const std::vector<double>& roots) {
  PolyD p;
  p.c = {1.0};
  for (double r : roots) {
    PolyD f;
    f.c = {-r, 1.0};
    p = poly_mul(p, f);
  }
  return p;
}

// Independent oracle for cubic roots: split the axis at the critical points
// (quadratic formula on p') into monotone intervals and bisect each one.
std::vector<double> cubic_roots_bisection(const PolyD& p) {
  const double c1 = p.c[1], c2 = 2.0 * p.c[2], c3 = 3.0 * p.c[3];
  std::vector<double> knots = {-1e6, 1e6};
  const double disc = c2 * c2 - 4.0 * c3 * c1;
  if (disc > 0.0 && std::abs(c3) > 1e-300) {
    knots.push_back((-c2 + std::sqrt(disc)) / (2.0 * c3));
    knots.push_back((-c2 - std::sqrt(disc)) / (2.0 * c3));
  }
  std::sort(knots.begin(), knots.end());
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double a = knots[i], b = knots[i + 1];
    double fa = p.eval(a), fb = p.eval(b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (fa * fb > 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = p.eval(mid);
      if (fa * fm <= 0.0) {
        b = mid;
      } else {
        a = mid;
        fa = fm;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

TEST_CASE("svd of identity has unit singular values") {
  const auto f = svd(MatD::identity(3));
  for (double s : f.s) CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("svd of diag(3,2,1) is the trivial factorization") {
  MatD a(3, 3);
  a(0, 0) = 3;
  a(1, 1) = 2;
  a(2, 2) = 1;
  const auto f = svd(a);
  CHECK(f.s[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f.s[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.s[2] == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(f.u(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
      CHECK(f.v(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
    }
}

TEST_CASE("svd reconstructs a random 9x9 to 1e-12") {
  Rng rng(3);
  const MatD a = random_mat(9, 9, rng);
  CHECK(recon_err(a, svd(a)) < 1e-12);
}

TEST_CASE("svd fuzz: reconstruction and orthogonality over 1000 shapes up to 12x12") {
  Rng rng(19);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + rng.uniform_int(12);
    const int n = 1 + rng.uniform_int(12);
    const MatD a = random_mat(m, n, rng, -2.0, 2.0);
    const auto f = svd(a);
    CHECK(recon_err(a, f) < 1e-11);
    CHECK(ortho_err(f.u) < 1e-12);
    CHECK(ortho_err(f.v) < 1e-12);
    for (std::size_t i = 1; i < f.s.size(); ++i) CHECK(f.s[i - 1] >= f.s[i]);
    for (double s : f.s) CHECK(s >= 0.0);
  }
}

TEST_CASE("null_space of [e1; e2]^T rows is +-e3") {
  MatD a(2, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  const auto ns = null_space(a, 1);
  CHECK(std::abs(ns.basis(2, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(ns.basis(0, 0)) < 1e-14);
  CHECK(std::abs(ns.basis(1, 0)) < 1e-14);
  CHECK_FALSE(ns.degenerate);
}

TEST_CASE("null_space of the zero 2x3 matrix is any orthonormal 3x3 basis") {
  MatD a(2, 3);
  const auto ns = null_space(a, 3);
  CHECK(ortho_err(ns.basis) < 1e-14);
  const MatD prod = a * ns.basis;
  for (double x : prod.data()) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("null_space of stacked epipolar constraints from a known model") {
  // Seven constraint rows built from a known essential matrix; the 2-dim
  // nullspace must satisfy every constraint.
  Rng rng(101);
  MatD e(3, 3);
  for (auto& x : e.data()) x = rng.uniform(-1, 1);
  MatD a(7, 9);
  for (int i = 0; i < 7; ++i) {
    const double x1 = rng.uniform(-1, 1), y1 = rng.uniform(-1, 1);
    // Choose (x2, y2) on the epipolar line of (x1, y1, 1).
    const double l0 = e(0, 0) * x1 + e(0, 1) * y1 + e(0, 2);
    const double l1 = e(1, 0) * x1 + e(1, 1) * y1 + e(1, 2);
    const double l2 = e(2, 0) * x1 + e(2, 1) * y1 + e(2, 2);
    const double x2 = rng.uniform(-1, 1);
    const double y2 = -(l0 * x2 + l2) / l1;
    const double row[9] = {x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2, x1, y1, 1.0};
    for (int j = 0; j < 9; ++j) a(i, j) = row[j];
  }
  const auto ns = null_space(a, 2);
  const MatD prod = a * ns.basis;
  for (double x : prod.data()) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("roots_cubic solves x^3 - 1") {
  PolyD p;
  p.c = {-1.0, 0.0, 0.0, 1.0};
  const auto r = roots_cubic(p);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("roots_cubic solves (x-1)(x-2)(x-3)") {
  const PolyD p = poly_from_roots({1.0, 2.0, 3.0});
  const auto r = roots_cubic(p);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r[2] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("roots_cubic demotes to quadratic when the cubic term vanishes") {
  PolyD p;
  p.c = {2.0, -3.0, 1.0, 1e-15};  // (x-1)(x-2) + negligible cubic term
  const auto r = roots_cubic(p);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("roots_cubic matches an independent root bracketing oracle on 100 random cubics") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> roots = {rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    PolyD p = poly_from_roots(roots);
    const double scale = rng.uniform(0.2, 5.0);
    for (auto& c : p.c) c *= scale;
    auto mine = roots_cubic(p);
    auto oracle = cubic_roots_bisection(p);
    std::sort(roots.begin(), roots.end());
    REQUIRE(mine.size() == 3);
    REQUIRE(oracle.size() >= 1);
    for (std::size_t i = 0; i < mine.size(); ++i) {
      double best = 1e9;
      for (double o : oracle) best = std::min(best, std::abs(mine[i] - o));
      CHECK(best < 1e-8);
    }
  }
}

TEST_CASE("roots_companion recovers 0..9 from the factored degree-10 polynomial") {
  std::vector<double> roots;
  for (int i = 0; i <= 9; ++i) roots.push_back(i);
  const PolyD p = poly_from_roots(roots);
  const auto r = roots_companion(p);
  REQUIRE(r.size() == 10);
  for (int i = 0; i <= 9; ++i) CHECK(std::abs(r[i] - i) < 1e-6);
}

TEST_CASE("roots_companion returns no real roots for x^2 + 1") {
  PolyD p;
  p.c = {1.0, 0.0, 1.0};
  CHECK(roots_companion(p).empty());
}

TEST_CASE("every companion root satisfies |p(r)| <= 1e-8 max|coeff|") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const int deg = 2 + rng.uniform_int(9);
    std::vector<double> roots;
    for (int i = 0; i < deg; ++i) roots.push_back(rng.uniform(-10, 10));
    PolyD p = poly_from_roots(roots);
    const double scale = rng.uniform(0.1, 10.0);
    for (auto& c : p.c) c *= scale;
    double max_c = 0.0;
    for (double c : p.c) max_c = std::max(max_c, std::abs(c));
    const auto found = roots_companion(p);
    CHECK(found.size() >= 1);
    for (double r : found) CHECK(std::abs(p.eval(r)) <= 1e-8 * max_c);
  }
}

TEST_CASE("roots_cubic and roots_companion agree on fuzzed cubics") {
  Rng rng(53);
  for (int trial = 0; trial < 300; ++trial) {
    PolyD p;
    p.c = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.3, 2.0)};
    const auto a = roots_cubic(p);
    const auto b = roots_companion(p);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
  }
}

TEST_CASE("det3 and cross3 basics") {
  CHECK(det3(MatD::identity(3)) == 1.0);
  const Vec3<double> e1 = {1, 0, 0}, e2 = {0, 1, 0};
  const auto e3 = cross3(e1, e2);
  CHECK(e3[0] == 0.0);
  CHECK(e3[1] == 0.0);
  CHECK(e3[2] == 1.0);
}

TEST_CASE("det3 equals the product of singular values up to sign") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const MatD m = random_mat(3, 3, rng, -2, 2);
    const auto f = svd(m);
    const double p = f.s[0] * f.s[1] * f.s[2];
    CHECK(std::abs(std::abs(det3(m)) - p) <= 1e-10 * std::max(1.0, p));
  }
}

TEST_CASE("eig3_sym reconstructs symmetric matrices") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    MatD a = random_mat(3, 3, rng, -2, 2);
    a = a + transpose(a);
    const auto e = eig3_sym(a);
    CHECK(ortho_err(e.vectors) < 1e-12);
    MatD d(3, 3);
    for (int i = 0; i < 3; ++i) d(i, i) = e.values[i];
    const MatD r = e.vectors * d * transpose(e.vectors);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(r.data()[i] - a.data()[i]) < 1e-10);
    CHECK(e.values[0] >= e.values[1]);
    CHECK(e.values[1] >= e.values[2]);
  }
}

TEST_CASE("qr and rq3 factorizations hold") {
  Rng rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    const MatD a = random_mat(4, 3, rng, -2, 2);
    const auto f = qr(a);
    CHECK(ortho_err(f.q) < 1e-12);
    const MatD qa = f.q * f.r;
    for (int i = 0; i < 12; ++i) CHECK(std::abs(qa.data()[i] - a.data()[i]) < 1e-12);
    for (int i = 1; i < f.r.rows(); ++i)
      for (int j = 0; j < std::min(i, f.r.cols()); ++j) CHECK(std::abs(f.r(i, j)) < 1e-12);

    const MatD b = random_mat(3, 3, rng, -2, 2);
    const auto g = rq3(b);
    CHECK(ortho_err(g.q) < 1e-12);
    CHECK(det3(g.q) == doctest::Approx(1.0).epsilon(1e-10));
    const MatD rq = g.r * g.q;
    for (int i = 0; i < 9; ++i) CHECK(std::abs(rq.data()[i] - b.data()[i]) < 1e-10);
    CHECK(std::abs(g.r(1, 0)) < 1e-10);
    CHECK(std::abs(g.r(2, 0)) < 1e-10);
    CHECK(std::abs(g.r(2, 1)) < 1e-10);
  }
}

TEST_CASE("svd Var partials match finite differences away from degeneracies") {
  Rng rng(91);
  for (const auto& [m, n] : {std::pair(3, 3), std::pair(4, 3), std::pair(2, 5)}) {
    for (int trial = 0; trial < 10; ++trial) {
      // Exact, well-separated spectrum: random rotations around diag(9.., 6.., 3..).
      MatD base(m, n);
      const int r = std::min(m, n);
      for (int i = 0; i < r; ++i) base(i, i) = 3.0 * (r - i) + rng.uniform(0.0, 0.5);
      const MatD qu = qr(random_mat(m, m, rng)).q;
      const MatD qv = qr(random_mat(n, n, rng)).q;
      MatD a0 = qu * base * transpose(qv);

      std::vector<double> weights(static_cast<std::size_t>(m * m + n * n + r + n * n));
      for (auto& w : weights) w = rng.uniform(-1, 1);

      // Entries paired with a singular value are checked directly; columns of
      // v past r (the completed null block) only through their projector,
      // which is the gauge-invariant object the derivative convention defines.
      auto f = [&](Tape& tape, std::span<const double> x) {
        MatV av(m, n);
        for (int i = 0; i < m * n; ++i) av.data()[i] = tape.leaf(x[i]);
        const auto s = svd(av);
        Var loss(0.0);
        std::size_t w = 0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j, ++w)
            if (j < r) loss += weights[w] * s.u(i, j);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j, ++w)
            if (j < r) loss += weights[w] * s.v(i, j);
        for (int i = 0; i < r; ++i) loss += weights[w++] * s.s[i];
        if (n > r) {
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j, ++w) {
              Var pij(0.0);
              for (int c = r; c < n; ++c) pij += s.v(i, c) * s.v(j, c);
              loss += weights[w] * pij;
            }
        }
        return loss;
      };
      const auto report = gransac::diff::grad_check(f, a0.data(), 1e-6);
      CHECK(report.max_rel_err < 1e-6);
    }
  }
}

TEST_CASE("null_space Var gradient is exact for gauge-invariant functions") {
  // For a multi-dimensional nullspace only the projector B B^T is
  // well-defined; its gradient must match finite differences.
  Rng rng(97);
  for (int trial = 0; trial < 5; ++trial) {
    const MatD a0 = random_mat(5, 9, rng, -1, 1);
    MatD w9(9, 9);
    for (auto& x : w9.data()) x = rng.uniform(-1, 1);

    auto f = [&](Tape& tape, std::span<const double> x) {
      MatV av(5, 9);
      for (int i = 0; i < 45; ++i) av.data()[i] = tape.leaf(x[i]);
      const auto ns = null_space(av, 4);
      Var loss(0.0);
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
          Var pij(0.0);
          for (int c = 0; c < 4; ++c) pij += ns.basis(i, c) * ns.basis(j, c);
          loss += w9(i, j) * pij;
        }
      return loss;
    };
    const auto report = gransac::diff::grad_check(f, a0.data(), 1e-6);
    CHECK(report.max_rel_err < 1e-6);
  }
}
