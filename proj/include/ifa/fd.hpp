#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "ifa/matrix.hpp"

namespace ifa {

// Central finite difference of a scalar functional with respect to every
// entry of `x`. The functional is re-evaluated with entries perturbed in
// place, so it must read `x` afresh on each call.
inline Matrix finite_difference(Matrix& x, const std::function<double()>& f, double h = 1e-5) {
  Matrix g(x.rows(), x.cols(), 0.0);
  auto xs = x.flat();
  auto gs = g.flat();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double keep = xs[i];
    xs[i] = keep + h;
    const double fp = f();
    xs[i] = keep - h;
    const double fm = f();
    xs[i] = keep;
    gs[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Worst relative disagreement between an analytic gradient and a finite
// difference estimate. The denominator is floored at a small fraction of the
// gradient scale so that near-zero entries are judged on absolute agreement.
inline double max_grad_rel_err(const Matrix& analytic, const Matrix& fd) {
  const double scale = std::max(analytic.max_abs(), fd.max_abs());
  const double floor = std::max(1e-8, 1e-4 * scale);
  double worst = 0.0;
  auto as = analytic.flat();
  auto fs = fd.flat();
  for (std::size_t i = 0; i < as.size(); ++i) {
    const double denom = std::max({std::fabs(as[i]), std::fabs(fs[i]), floor});
    worst = std::max(worst, std::fabs(as[i] - fs[i]) / denom);
  }
  return worst;
}

}  // namespace ifa
