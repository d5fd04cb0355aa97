#pragma once

#include <cmath>
#include <limits>

#include "riemspline/types.hpp"

namespace riemspline::fd {

/// Default step for 4th-order central differences: cbrt(eps) * max(1, |x|).
inline double step(double x) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(x));
}

/// 4th-order central difference of f along coordinate k at q.
/// Works for any value type supporting +, -, and scalar division (double, Vec, Mat).
template <typename F>
auto partial(const F& f, const Vec& q, int k, double h = 0.0) {
  using R = std::decay_t<decltype(f(q))>;
  if (h == 0.0) h = step(q[k]);
  Vec qp = q;
  qp[k] = q[k] + h;
  const R f1 = f(qp);
  qp[k] = q[k] - h;
  const R fm1 = f(qp);
  qp[k] = q[k] + 2 * h;
  const R f2 = f(qp);
  qp[k] = q[k] - 2 * h;
  const R fm2 = f(qp);
  // materialize before the operands go out of scope (Eigen expressions)
  const R out = ((fm2 - f2) + 8.0 * (f1 - fm1)) / (12.0 * h);
  return out;
}

}  // namespace riemspline::fd
