#pragma once

#include "socverify/errors.hpp"
#include "socverify/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace socv {

struct QuadratureResult {
  double value = 0.0;
  /// Set when N is odd and the last interval used the trapezoid rule.
  bool trapezoid_tail = false;
};

/// Composite Simpson over node samples.
inline QuadratureResult quad(const ScalarSeries& series) {
  const TimeGrid& g = series.grid();
  const std::size_t n = g.intervals();
  const double h = g.step();
  QuadratureResult r;
  const std::size_t even = n - (n % 2);
  double s = 0.0;
  for (std::size_t k = 0; k + 2 <= even; k += 2) s += series[k] + 4.0 * series[k + 1] + series[k + 2];
  r.value = s * h / 3.0;
  if (even != n) {
    r.value += 0.5 * h * (series[n - 1] + series[n]);
    r.trapezoid_tail = true;
  }
  return r;
}

/// Integral of a function that is smooth inside every interval but may jump at
/// nodes (anything involving a piecewise-constant control). Simpson on each
/// interval; `g(stage)` is evaluated at the left, mid and right stage of every
/// interval with interval-local data.
template <class G>
double quad_piecewise(const TimeGrid& grid, G&& g) {
  const double w = grid.step() / 6.0;
  double s = 0.0;
  for (std::size_t k = 0; k < grid.intervals(); ++k)
    s += w * (g(stage_left(grid, k)) + 4.0 * g(stage_mid(grid, k)) + g(stage_right(grid, k)));
  return s;
}

/// Running integral C(t_k) = int_0^{t_k} g, same per-interval Simpson rule.
template <class G>
ScalarSeries cumulative_piecewise(const TimeGrid& grid, G&& g) {
  const double w = grid.step() / 6.0;
  std::vector<double> out(grid.nodes(), 0.0);
  for (std::size_t k = 0; k < grid.intervals(); ++k)
    out[k + 1] = out[k] + w * (g(stage_left(grid, k)) + 4.0 * g(stage_mid(grid, k)) + g(stage_right(grid, k)));
  return ScalarSeries(grid, std::move(out));
}

/// int_0^T dt int_0^t K(t, s) ds with node kernels K(t_k, s_j), j <= k.
/// Inner integral: trapezoid over s_0..s_k. Outer: Simpson (trapezoid tail for odd N).
/// Summation order is ascending s, then ascending t.
template <class K>
double tri_double_integral(K&& kernel, const TimeGrid& grid) {
  const double h = grid.step();
  std::vector<double> inner(grid.nodes(), 0.0);
  for (std::size_t k = 1; k < grid.nodes(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      const double v = kernel(k, j);
      if (!std::isfinite(v))
        throw EvaluationError("tri_double_integral: non-finite kernel at (t, s) nodes (" + std::to_string(k) +
                              ", " + std::to_string(j) + ")");
      s += (j == 0 || j == k) ? 0.5 * v : v;
    }
    inner[k] = h * s;
  }
  {
    const double v = kernel(std::size_t{0}, std::size_t{0});
    if (!std::isfinite(v)) throw EvaluationError("tri_double_integral: non-finite kernel at (t, s) nodes (0, 0)");
  }
  return quad(ScalarSeries(grid, std::move(inner))).value;
}

} // namespace socv
