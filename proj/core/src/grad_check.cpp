#include "gransac/diff/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace gransac::diff {

GradCheckReport grad_check(const CheckedFn& f, std::span<const double> x, double h) {
  const int n = static_cast<int>(x.size());
  GradCheckReport report;
  report.analytic.resize(n, 0.0);
  report.numeric.resize(n, 0.0);

  Tape tape;
  const Var loss = f(tape, x);
  if (loss.is_const()) throw std::invalid_argument("grad_check: loss does not depend on the tape");
  const std::vector<double> adjoint = tape.backward(loss.node);
  // Leaves are created in coordinate order by contract: node i <-> x[i].
  for (int i = 0; i < n; ++i) report.analytic[i] = adjoint[i];

  std::vector<double> xp(x.begin(), x.end());
  for (int i = 0; i < n; ++i) {
    double fp = 0.0, fm = 0.0;
    try {
      Tape t1;
      xp[i] = x[i] + h;
      fp = f(t1, xp).v;
      Tape t2;
      xp[i] = x[i] - h;
      fm = f(t2, xp).v;
    } catch (const std::exception&) {
      report.skipped.push_back(i);
      xp[i] = x[i];
      continue;
    }
    xp[i] = x[i];
    report.numeric[i] = (fp - fm) / (2.0 * h);
    const double a = report.analytic[i];
    const double d = report.numeric[i];
    const double denom = std::max({1.0, std::abs(a), std::abs(d)});
    const double rel = std::abs(a - d) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_dim = i;
    }
  }
  return report;
}

}  // namespace gransac::diff
