#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace gransac::diff {

class Tape;

// Scalar value tracked by the reverse-mode engine. A Var is either a constant
// (node < 0, tape == nullptr) or a handle into a tape node. Vars are plain
// values: copying is cheap and never touches the tape.
struct Var {
  double v = 0.0;
  int node = -1;
  Tape* tape = nullptr;

  Var() = default;
  Var(double value) : v(value) {}  // implicit: constants mix freely with Vars
  Var(double value, int n, Tape* t) : v(value), node(n), tape(t) {}

  bool is_const() const { return node < 0; }
};

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }

// Append-only DAG of local partial derivatives. Parent indices are always
// smaller than the node's own index, so one reverse sweep in index order
// propagates adjoints in topological order.
class Tape {
 public:
  struct Edge {
    int parent;
    double partial;
  };

  int new_leaf() {
    nodes_.push_back({edges_.size(), 0});
    return static_cast<int>(nodes_.size()) - 1;
  }

  Var leaf(double value) { return Var(value, new_leaf(), this); }

  int new_node(std::initializer_list<Edge> edges) {
    return new_node(std::span<const Edge>(edges.begin(), edges.size()));
  }

  int new_node(std::span<const Edge> edges) {
    const std::size_t begin = edges_.size();
    for (const Edge& e : edges) {
      if (e.parent >= 0) edges_.push_back(e);
    }
    nodes_.push_back({begin, static_cast<std::uint32_t>(edges_.size() - begin)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  void clear() {
    nodes_.clear();
    edges_.clear();
  }

  // Adjoints of `node` with respect to every tape node. NaNs propagate as-is;
  // they are reported to the caller, never masked.
  std::vector<double> backward(int node) const {
    if (node < 0 || node >= static_cast<int>(nodes_.size()))
      throw std::invalid_argument("Tape::backward: node is not on this tape");
    std::vector<double> adjoint(nodes_.size(), 0.0);
    adjoint[node] = 1.0;
    for (int i = node; i >= 0; --i) {
      const double a = adjoint[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      for (std::uint32_t e = 0; e < n.count; ++e) {
        const Edge& edge = edges_[n.begin + e];
        adjoint[edge.parent] += edge.partial * a;
      }
    }
    return adjoint;
  }

 private:
  struct Node {
    std::size_t begin;
    std::uint32_t count;
  };

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

namespace detail {

inline Tape* common_tape(const Var& a, const Var& b) {
  if (a.tape && b.tape && a.tape != b.tape)
    throw std::invalid_argument("diff: operands belong to different tapes");
  return a.tape ? a.tape : b.tape;
}

inline Var unary(const Var& x, double value, double partial) {
  if (x.is_const()) return Var(value);
  return Var(value, x.tape->new_node({{x.node, partial}}), x.tape);
}

inline Var binary(const Var& a, const Var& b, double value, double da, double db) {
  Tape* t = common_tape(a, b);
  if (!t) return Var(value);
  return Var(value, t->new_node({{a.node, da}, {b.node, db}}), t);
}

}  // namespace detail

// ---- arithmetic -----------------------------------------------------------

inline Var operator+(const Var& a, const Var& b) { return detail::binary(a, b, a.v + b.v, 1.0, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return detail::binary(a, b, a.v - b.v, 1.0, -1.0); }
inline Var operator*(const Var& a, const Var& b) { return detail::binary(a, b, a.v * b.v, b.v, a.v); }

inline Var operator/(const Var& a, const Var& b) {
  if (std::abs(b.v) < 1e-300) throw std::domain_error("diff: division by (near-)zero");
  const double inv = 1.0 / b.v;
  return detail::binary(a, b, a.v * inv, inv, -a.v * inv * inv);
}

inline Var operator-(const Var& x) { return detail::unary(x, -x.v, -1.0); }
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline Var operator+(const Var& a, double b) { return a + Var(b); }
inline Var operator+(double a, const Var& b) { return Var(a) + b; }
inline Var operator-(const Var& a, double b) { return a - Var(b); }
inline Var operator-(double a, const Var& b) { return Var(a) - b; }
inline Var operator*(const Var& a, double b) { return a * Var(b); }
inline Var operator*(double a, const Var& b) { return Var(a) * b; }
inline Var operator/(const Var& a, double b) { return a / Var(b); }
inline Var operator/(double a, const Var& b) { return Var(a) / b; }

// Branch decisions compare values; the choice itself is piecewise constant.
inline bool operator<(const Var& a, const Var& b) { return a.v < b.v; }
inline bool operator>(const Var& a, const Var& b) { return a.v > b.v; }
inline bool operator<=(const Var& a, const Var& b) { return a.v <= b.v; }
inline bool operator>=(const Var& a, const Var& b) { return a.v >= b.v; }

// ---- elementary functions --------------------------------------------------

inline Var sqrt(const Var& x) {
  if (x.v < 0.0) throw std::domain_error("diff: sqrt of negative value");
  const double s = std::sqrt(x.v);
  return detail::unary(x, s, s > 0.0 ? 0.5 / s : 0.0);
}

inline Var exp(const Var& x) {
  const double e = std::exp(x.v);
  return detail::unary(x, e, e);
}

inline Var log(const Var& x) {
  if (x.v <= 0.0) throw std::domain_error("diff: log of non-positive value");
  return detail::unary(x, std::log(x.v), 1.0 / x.v);
}

inline Var pow(const Var& x, double p) {
  const double f = std::pow(x.v, p);
  return detail::unary(x, f, p * std::pow(x.v, p - 1.0));
}

inline Var sin(const Var& x) { return detail::unary(x, std::sin(x.v), std::cos(x.v)); }
inline Var cos(const Var& x) { return detail::unary(x, std::cos(x.v), -std::sin(x.v)); }

inline Var tan(const Var& x) {
  const double c = std::cos(x.v);
  return detail::unary(x, std::tan(x.v), 1.0 / (c * c));
}

inline Var atan(const Var& x) { return detail::unary(x, std::atan(x.v), 1.0 / (1.0 + x.v * x.v)); }

inline Var atan2(const Var& y, const Var& x) {
  const double d = x.v * x.v + y.v * y.v;
  if (d < 1e-300) throw std::domain_error("diff: atan2 at the origin");
  return detail::binary(y, x, std::atan2(y.v, x.v), x.v / d, -y.v / d);
}

// acos with the clamp convention: values within 1e-9 of [-1, 1] are clamped;
// the recorded derivative is evaluated at a point pulled 1e-9 inside the
// interval, which bounds the gradient near 0 and 180 degrees.
inline Var acos(const Var& x) {
  constexpr double kTol = 1e-9;
  if (x.v < -1.0 - kTol || x.v > 1.0 + kTol)
    throw std::domain_error("diff: acos argument outside [-1-1e-9, 1+1e-9]");
  double xc = x.v < -1.0 ? -1.0 : (x.v > 1.0 ? 1.0 : x.v);
  double xd = xc < -1.0 + kTol ? -1.0 + kTol : (xc > 1.0 - kTol ? 1.0 - kTol : xc);
  return detail::unary(x, std::acos(xc), -1.0 / std::sqrt(1.0 - xd * xd));
}

inline Var asin(const Var& x) {
  constexpr double kTol = 1e-9;
  if (x.v < -1.0 - kTol || x.v > 1.0 + kTol)
    throw std::domain_error("diff: asin argument outside [-1-1e-9, 1+1e-9]");
  double xc = x.v < -1.0 ? -1.0 : (x.v > 1.0 ? 1.0 : x.v);
  double xd = xc < -1.0 + kTol ? -1.0 + kTol : (xc > 1.0 - kTol ? 1.0 - kTol : xc);
  return detail::unary(x, std::asin(xc), 1.0 / std::sqrt(1.0 - xd * xd));
}

// Subgradient convention for the kink at 0: sign(0) := +1.
inline Var abs(const Var& x) { return detail::unary(x, std::abs(x.v), x.v < 0.0 ? -1.0 : 1.0); }

// min/max route the whole adjoint to the attaining argument; ties go to the
// first argument so results do not depend on evaluation order.
inline Var min(const Var& a, const Var& b) {
  Tape* t = detail::common_tape(a, b);
  const bool first = a.v <= b.v;
  const double value = first ? a.v : b.v;
  if (!t) return Var(value);
  return Var(value, t->new_node({{a.node, first ? 1.0 : 0.0}, {b.node, first ? 0.0 : 1.0}}), t);
}

inline Var max(const Var& a, const Var& b) {
  Tape* t = detail::common_tape(a, b);
  const bool first = a.v >= b.v;
  const double value = first ? a.v : b.v;
  if (!t) return Var(value);
  return Var(value, t->new_node({{a.node, first ? 1.0 : 0.0}, {b.node, first ? 0.0 : 1.0}}), t);
}

// ---- straight-through ------------------------------------------------------

// Forward value is exactly forward_value; the backward pass routes the whole
// incoming adjoint to `surrogate`. This is Y + y~ - sg(y~) as a single node:
// the forward graph of forward_value is intentionally disconnected.
inline Var straight_through(const Var& forward_value, const Var& surrogate) {
  if (surrogate.is_const()) return Var(forward_value.v);
  return Var(forward_value.v, surrogate.tape->new_node({{surrogate.node, 1.0}}), surrogate.tape);
}

// ---- fused helpers ---------------------------------------------------------

// Dot product as one n-ary node; partials are the opposing values.
inline Var vdot(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vdot: length mismatch");
  double value = 0.0;
  Tape* t = nullptr;
  for (std::size_t i = 0; i < a.size(); ++i) {
    value += a[i].v * b[i].v;
    if (!t) t = a[i].tape ? a[i].tape : b[i].tape;
  }
  if (!t) return Var(value);
  std::vector<Tape::Edge> edges;
  edges.reserve(2 * a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].tape && a[i].tape != t) throw std::invalid_argument("vdot: mixed tapes");
    if (b[i].tape && b[i].tape != t) throw std::invalid_argument("vdot: mixed tapes");
    if (!a[i].is_const()) edges.push_back({a[i].node, b[i].v});
    if (!b[i].is_const()) edges.push_back({b[i].node, a[i].v});
  }
  return Var(value, t->new_node(std::span<const Tape::Edge>(edges)), t);
}

inline Var vsum(std::span<const Var> xs) {
  double value = 0.0;
  Tape* t = nullptr;
  for (const Var& x : xs) {
    value += x.v;
    if (!t && x.tape) t = x.tape;
  }
  if (!t) return Var(value);
  std::vector<Tape::Edge> edges;
  edges.reserve(xs.size());
  for (const Var& x : xs) {
    if (x.tape && x.tape != t) throw std::invalid_argument("vsum: mixed tapes");
    if (!x.is_const()) edges.push_back({x.node, 1.0});
  }
  return Var(value, t->new_node(std::span<const Tape::Edge>(edges)), t);
}

}  // namespace gransac::diff
