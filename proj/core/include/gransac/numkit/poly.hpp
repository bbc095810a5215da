#pragma once

#include <vector>

#include "gransac/diff/tape.hpp"

namespace gransac::numkit {

// Dense univariate polynomial, coefficients in ascending degree order.
// Degree stays <= 10 everywhere in this project.
template <typename T>
struct Poly {
  std::vector<T> c;

  Poly() = default;
  explicit Poly(std::vector<T> coeffs) : c(std::move(coeffs)) {}

  int degree() const { return static_cast<int>(c.size()) - 1; }

  T eval(const T& x) const {
    T acc(0.0);
    for (int i = degree(); i >= 0; --i) acc = acc * x + c[i];
    return acc;
  }

  Poly derivative() const {
    Poly d;
    if (c.size() <= 1) {
      d.c = {T(0.0)};
      return d;
    }
    d.c.resize(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * static_cast<double>(i);
    return d;
  }
};

using PolyD = Poly<double>;
using PolyV = Poly<diff::Var>;

template <typename T>
Poly<T> poly_mul(const Poly<T>& a, const Poly<T>& b) {
  Poly<T> out;
  out.c.assign(a.c.size() + b.c.size() - 1, T(0.0));
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) out.c[i + j] += a.c[i] * b.c[j];
  return out;
}

template <typename T>
Poly<T> poly_sub(const Poly<T>& a, const Poly<T>& b) {
  Poly<T> out;
  out.c.assign(std::max(a.c.size(), b.c.size()), T(0.0));
  for (std::size_t i = 0; i < a.c.size(); ++i) out.c[i] += a.c[i];
  for (std::size_t i = 0; i < b.c.size(); ++i) out.c[i] -= b.c[i];
  return out;
}

// Multiply by the monomial x^k.
template <typename T>
Poly<T> poly_shift(const Poly<T>& a, int k) {
  Poly<T> out;
  out.c.assign(a.c.size() + k, T(0.0));
  for (std::size_t i = 0; i < a.c.size(); ++i) out.c[i + k] = a.c[i];
  return out;
}

// Real roots of a degree-3 polynomial in closed form (Cardano / trigonometric
// branch), each polished by two Newton steps, sorted ascending. A leading
// coefficient below 1e-12 * max|coeff| demotes the problem to a quadratic.
std::vector<double> roots_cubic(const PolyD& p);
std::vector<diff::Var> roots_cubic(const PolyV& p);

// Real eigenvalues of the companion matrix (balanced Hessenberg double-shift
// QR, 500-step cap), refined by two Newton steps. A root is kept as real when
// |Im| < 1e-8 relative to the spectral radius. Degree <= 10.
std::vector<double> roots_companion(const PolyD& p);
std::vector<diff::Var> roots_companion(const PolyV& p);

}  // namespace gransac::numkit
