#pragma once

#include "socverify/errors.hpp"
#include "socverify/grid.hpp"
#include "socverify/linalg.hpp"

#include <string>
#include <utility>
#include <vector>

namespace socv {

enum class Direction { forward, backward };

/// Classical RK4 on the uniform grid. `field(stage, y)` returns y' and sees the
/// interval index of every stage, so piecewise-constant data (controls) stay
/// fixed across a step, including its boundary stages. A backward sweep places
/// y0 at t = T and steps with -h.
template <class T, class Field>
GridFunction<T> integrate(Field&& field, T y0, const TimeGrid& grid, Direction dir = Direction::forward) {
  if (!all_finite(y0)) throw DivergenceError("integrate: non-finite initial value", dir == Direction::forward ? 0 : grid.intervals());
  const std::size_t n = grid.intervals();
  std::vector<T> out(n + 1, y0);
  const double h = grid.step();

  if (dir == Direction::forward) {
    for (std::size_t k = 0; k < n; ++k) {
      const T& y = out[k];
      const T k1 = field(stage_left(grid, k), y);
      const T k2 = field(stage_mid(grid, k), T(y + (0.5 * h) * k1));
      const T k3 = field(stage_mid(grid, k), T(y + (0.5 * h) * k2));
      const T k4 = field(stage_right(grid, k), T(y + h * k3));
      out[k + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!all_finite(out[k + 1]))
        throw DivergenceError("integrate: non-finite state at node " + std::to_string(k + 1), k + 1);
    }
  } else {
    const double hb = -h;
    for (std::size_t k = n; k-- > 0;) {
      const T& y = out[k + 1];
      const T k1 = field(stage_right(grid, k), y);
      const T k2 = field(stage_mid(grid, k), T(y + (0.5 * hb) * k1));
      const T k3 = field(stage_mid(grid, k), T(y + (0.5 * hb) * k2));
      const T k4 = field(stage_left(grid, k), T(y + hb * k3));
      out[k] = y + (hb / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!all_finite(out[k]))
        throw DivergenceError("integrate: non-finite state at node " + std::to_string(k), k);
    }
  }
  return GridFunction<T>(grid, std::move(out));
}

/// Integrate and attach Hermite midpoints computed from the same field.
template <class T, class Field>
StagePath<T> integrate_path(Field&& field, T y0, const TimeGrid& grid, Direction dir = Direction::forward) {
  auto nodes = integrate<T>(field, std::move(y0), grid, dir);
  return hermite_path(std::move(nodes), field);
}

} // namespace socv
