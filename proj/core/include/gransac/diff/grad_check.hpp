#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gransac/diff/tape.hpp"

namespace gransac::diff {

// A differentiable scalar function for auditing: given a tape and a point it
// must build the loss from tape leaves created at exactly those coordinates.
using CheckedFn = std::function<Var(Tape&, std::span<const double>)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  int worst_dim = -1;
  std::vector<int> skipped;  // coordinates where f failed at a perturbed point
  std::vector<double> analytic;
  std::vector<double> numeric;
};

// Central-difference audit of the tape gradient. Relative error per
// coordinate is |analytic - fd| / max(1, |analytic|, |fd|).
GradCheckReport grad_check(const CheckedFn& f, std::span<const double> x, double h = 1e-6);

}  // namespace gransac::diff
