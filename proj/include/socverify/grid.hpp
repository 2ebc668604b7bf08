#pragma once

#include "socverify/errors.hpp"
#include "socverify/linalg.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace socv {

/// Uniform grid t_k = k T / N on [0, T].
class TimeGrid {
public:
  TimeGrid(double horizon, std::size_t intervals) : horizon_(horizon), intervals_(intervals) {
    if (!(horizon > 0.0)) throw DomainError("time grid: horizon must be positive");
    if (intervals == 0) throw DomainError("time grid: need at least one interval");
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t nodes() const noexcept { return intervals_ + 1; }
  double step() const noexcept { return horizon_ / static_cast<double>(intervals_); }

  double node(std::size_t k) const noexcept {
    if (k == intervals_) return horizon_;
    return horizon_ * static_cast<double>(k) / static_cast<double>(intervals_);
  }

  double midpoint(std::size_t k) const noexcept { return 0.5 * (node(k) + node(k + 1)); }

  /// Trapezoid weight of node k; the weights sum to T. Used to measure node sets.
  double node_weight(std::size_t k) const noexcept {
    return (k == 0 || k == intervals_) ? 0.5 * step() : step();
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
  double horizon_;
  std::size_t intervals_;
};

/// One value per grid node (N + 1 samples).
template <class T>
class GridFunction {
public:
  using value_type = T;

  GridFunction(TimeGrid grid, std::vector<T> samples) : grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.nodes())
      throw DomainError("grid function: sample count " + std::to_string(samples_.size()) +
                        " does not match node count " + std::to_string(grid_.nodes()));
  }

  GridFunction(TimeGrid grid, const T& fill) : grid_(grid), samples_(grid.nodes(), fill) {}

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const T& operator[](std::size_t k) const { return samples_[k]; }
  T& operator[](std::size_t k) { return samples_[k]; }
  const T& front() const { return samples_.front(); }
  const T& back() const { return samples_.back(); }
  const std::vector<T>& values() const noexcept { return samples_; }

private:
  TimeGrid grid_;
  std::vector<T> samples_;
};

using ScalarSeries = GridFunction<double>;
using VectorSeries = GridFunction<Vec>;
using MatrixSeries = GridFunction<Mat>;

template <class T>
double sup_distance(const GridFunction<T>& a, const GridFunction<T>& b) {
  if (a.size() != b.size()) throw DomainError("sup_distance: series on different grids");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, max_abs(T(a[k] - b[k])));
  return d;
}

template <class T>
double sup_norm(const GridFunction<T>& a) {
  double d = 0.0;
  for (const auto& v : a.values()) d = std::max(d, max_abs(v));
  return d;
}

/// Where an RK4 stage sits inside its interval.
enum class StagePos { left, mid, right };

struct Stage {
  std::size_t interval;
  StagePos pos;
  double t;
};

inline Stage stage_left(const TimeGrid& g, std::size_t k) { return {k, StagePos::left, g.node(k)}; }
inline Stage stage_mid(const TimeGrid& g, std::size_t k) { return {k, StagePos::mid, g.midpoint(k)}; }
inline Stage stage_right(const TimeGrid& g, std::size_t k) { return {k, StagePos::right, g.node(k + 1)}; }

/// Node samples plus interval midpoints of a path that is smooth inside each
/// interval. Coefficients of coupled equations are read from here at RK4 stages.
template <class T>
class StagePath {
public:
  StagePath(GridFunction<T> nodes, std::vector<T> midpoints)
      : nodes_(std::move(nodes)), mid_(std::move(midpoints)) {
    if (mid_.size() != nodes_.grid().intervals())
      throw DomainError("stage path: midpoint count does not match interval count");
  }

  const T& at(const Stage& s) const {
    switch (s.pos) {
    case StagePos::left: return nodes_[s.interval];
    case StagePos::mid: return mid_[s.interval];
    case StagePos::right: return nodes_[s.interval + 1];
    }
    return nodes_[s.interval];
  }

  const GridFunction<T>& nodes() const noexcept { return nodes_; }
  const std::vector<T>& midpoints() const noexcept { return mid_; }
  const TimeGrid& grid() const noexcept { return nodes_.grid(); }
  const T& operator[](std::size_t k) const { return nodes_[k]; }

private:
  GridFunction<T> nodes_;
  std::vector<T> mid_;
};

/// Cubic Hermite midpoints from node values and one-sided slopes.
/// slope(stage, value) must return the derivative at a left/right stage of interval k.
template <class T, class Slope>
StagePath<T> hermite_path(GridFunction<T> series, Slope&& slope) {
  const TimeGrid& g = series.grid();
  const double h = g.step();
  std::vector<T> mid;
  mid.reserve(g.intervals());
  for (std::size_t k = 0; k < g.intervals(); ++k) {
    const T d0 = slope(stage_left(g, k), series[k]);
    const T d1 = slope(stage_right(g, k), series[k + 1]);
    mid.push_back(T(0.5 * (series[k] + series[k + 1]) + (h / 8.0) * (d0 - d1)));
  }
  return StagePath<T>(std::move(series), std::move(mid));
}

namespace detail {

inline void append_flat(std::vector<double>& out, double v) { out.push_back(v); }
inline void append_flat(std::vector<double>& out, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
}
inline void append_flat(std::vector<double>& out, const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// CSV: header row, then one row per node with t followed by the row-major flattened value.
template <class T>
void write_csv(std::ostream& os, const GridFunction<T>& series, const std::string& name = "v") {
  std::vector<double> flat;
  detail::append_flat(flat, series[0]);
  os << "t";
  for (std::size_t i = 0; i < flat.size(); ++i) os << ',' << name << i;
  os << '\n';
  for (std::size_t k = 0; k < series.size(); ++k) {
    flat.clear();
    detail::append_flat(flat, series[k]);
    os << detail::format_double(series.grid().node(k));
    for (double v : flat) os << ',' << detail::format_double(v);
    os << '\n';
  }
}

} // namespace socv
