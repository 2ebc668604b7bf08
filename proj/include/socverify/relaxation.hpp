#pragma once

#include "socverify/errors.hpp"
#include "socverify/grid.hpp"
#include "socverify/problem.hpp"
#include "socverify/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace socv {

struct ChatterSpec {
  double alpha = 0.5;
  double epsilon = 0.25;
  PiecewiseControl base;
  PiecewiseControl probe;
};

/// Ordinary control that takes the probe value on interval k when frac(t_mid / epsilon) < alpha.
inline PiecewiseControl chattering(const ChatterSpec& spec, const TimeGrid& grid) {
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) throw DomainError("chattering: alpha must lie in [0, 1]");
  if (!(spec.epsilon > 0.0) || spec.epsilon > grid.horizon() * (1.0 + 1e-12))
    throw DomainError("chattering: epsilon must lie in (0, T]");
  if (!spec.base.compatible_with(spec.probe) || spec.base.intervals() != grid.intervals())
    throw DomainError("chattering: base and probe must share the grid and domain");
  if (grid.step() > spec.epsilon / 10.0 * (1.0 + 1e-12))
    throw ResolutionError("chattering: step " + detail::format_double(grid.step()) +
                          " does not resolve period " + detail::format_double(spec.epsilon) + " (need h <= eps/10)");
  if (spec.alpha == 0.0) return spec.base;
  if (spec.alpha == 1.0) return spec.probe;
  std::vector<std::size_t> v(grid.intervals());
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    const double r = grid.midpoint(k) / spec.epsilon;
    v[k] = (r - std::floor(r) < spec.alpha) ? spec.probe[k] : spec.base[k];
  }
  return PiecewiseControl(spec.base.domain_ptr(), std::move(v));
}

struct ChatterEntry {
  double epsilon = 0.0;
  double state_error = 0.0; // sup |x^{alpha,eps} - x^alpha|
  double cost_error = 0.0;  // |J(u^{alpha,eps}) - J(mixture)|
  double cost = 0.0;        // J(u^{alpha,eps})
};

struct ChatterReport {
  double alpha = 0.0;
  double mixture_cost = 0.0;
  std::vector<ChatterEntry> entries;
  std::vector<double> state_orders; // log(e_prev / e) / log(eps_prev / eps)
  std::vector<double> cost_orders;
};

namespace detail {

inline double rate(double e_prev, double e, double p_prev, double p) {
  if (e_prev == 0.0 && e == 0.0) return 0.0;
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return std::log(e_prev / e) / std::log(p_prev / p);
}

} // namespace detail

inline ChatterReport chattering_convergence(const Problem& p, const PiecewiseControl& ubar, const PiecewiseControl& u,
                                            double alpha, const std::vector<double>& eps_list, const TimeGrid& grid) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw DomainError("chattering_convergence: eps_list must decrease");
  ChatterReport r;
  r.alpha = alpha;
  const TrajectoryBundle mix = solve_state(p, RelaxedMixture(ubar, u, alpha), grid);
  r.mixture_cost = mix.cost;
  for (double eps : eps_list) {
    const TrajectoryBundle ch = solve_state(p, chattering(ChatterSpec{alpha, eps, ubar, u}, grid), grid);
    r.entries.push_back({eps, sup_distance(ch.nodes(), mix.nodes()), std::abs(ch.cost - mix.cost), ch.cost});
  }
  for (std::size_t i = 1; i < r.entries.size(); ++i) {
    const auto& a = r.entries[i - 1];
    const auto& b = r.entries[i];
    r.state_orders.push_back(detail::rate(a.state_error, b.state_error, a.epsilon, b.epsilon));
    r.cost_orders.push_back(detail::rate(a.cost_error, b.cost_error, a.epsilon, b.epsilon));
  }
  return r;
}

namespace detail {

inline VectorSeries nodewise_quotient(const VectorSeries& a, const VectorSeries& b, double alpha) {
  std::vector<Vec> out;
  out.reserve(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out.emplace_back((a[k] - b[k]) / alpha);
  return VectorSeries(a.grid(), std::move(out));
}

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("difference quotient needs alpha in (0, 1]; use the variational solution at alpha = 0");
}

} // namespace detail

/// X^alpha = (x^alpha - xbar) / alpha.
inline VectorSeries difference_quotient_X(const Problem& p, const PiecewiseControl& ubar, const PiecewiseControl& u,
                                          double alpha, const TimeGrid& grid) {
  detail::require_alpha(alpha);
  const auto base = solve_state(p, ubar, grid);
  const auto mix = solve_state(p, RelaxedMixture(ubar, u, alpha), grid);
  return detail::nodewise_quotient(mix.nodes(), base.nodes(), alpha);
}

/// Y^alpha = (X^alpha - X) / alpha, X the variational solution.
inline VectorSeries difference_quotient_Y(const Problem& p, const PiecewiseControl& ubar, const PiecewiseControl& u,
                                          double alpha, const VectorSeries& X, const TimeGrid& grid) {
  return detail::nodewise_quotient(difference_quotient_X(p, ubar, u, alpha, grid), X, alpha);
}

struct QuotientEntry {
  double alpha = 0.0;
  double x_error = 0.0; // sup |X^alpha - X|
  double y_error = 0.0; // sup |Y^alpha - Y|
};

struct QuotientReport {
  std::vector<QuotientEntry> entries;
  std::vector<double> x_orders;
  std::vector<double> y_orders;
};

/// Convergence of both difference quotients towards the variational solutions X and Y.
inline QuotientReport quotient_convergence(const Problem& p, const PiecewiseControl& ubar, const PiecewiseControl& u,
                                           const std::vector<double>& alphas, const TimeGrid& grid) {
  const auto base = solve_state(p, ubar, grid);
  const auto X = solve_variational(p, base, ubar, u, grid);
  const auto Y = solve_second_variational(p, base, ubar, u, X, grid);
  QuotientReport r;
  for (double a : alphas) {
    detail::require_alpha(a);
    const auto mix = solve_state(p, RelaxedMixture(ubar, u, a), grid);
    const VectorSeries xa = detail::nodewise_quotient(mix.nodes(), base.nodes(), a);
    const VectorSeries ya = detail::nodewise_quotient(xa, X.nodes(), a);
    r.entries.push_back({a, sup_distance(xa, X.nodes()), sup_distance(ya, Y.nodes())});
  }
  for (std::size_t i = 1; i < r.entries.size(); ++i) {
    const auto& a = r.entries[i - 1];
    const auto& b = r.entries[i];
    r.x_orders.push_back(detail::rate(a.x_error, b.x_error, a.alpha, b.alpha));
    r.y_orders.push_back(detail::rate(a.y_error, b.y_error, a.alpha, b.alpha));
  }
  return r;
}

/// Theta(t) = omega(rho(u(t), ubar(t))), exact per interval.
inline std::vector<double> theta(const PiecewiseControl& ubar, const PiecewiseControl& u, const Modulus& omega) {
  detail::require_pair(ubar, u);
  std::vector<double> th(u.intervals());
  for (std::size_t k = 0; k < th.size(); ++k) th[k] = omega(ubar.domain().distance(u[k], ubar[k]));
  return th;
}

struct BoundEntry {
  double alpha = 0.0;
  double c1 = 0.0; // min C with |X^alpha(t)| <= C int_0^t Theta
  double c2 = 0.0; // min C with |Y^alpha(t)| <= C int_0^t Theta^2
};

struct BoundReport {
  std::vector<BoundEntry> entries;
  double c1_spread = 1.0; // max / min over alpha; 1 when all constants vanish
  double c2_spread = 1.0;
  double max_spread = 2.0;

  bool passed() const { return c1_spread <= max_spread && c2_spread <= max_spread; }
};

namespace detail {

/// Entries of |X^alpha| or |Y^alpha| at or below this level are roundoff, not signal.
inline constexpr double bound_noise_floor = 1e-10;

inline double envelope_constant(const VectorSeries& v, const std::vector<double>& integral, const char* what) {
  double c = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double num = v[k].norm();
    if (num <= bound_noise_floor) continue;
    if (integral[k] <= 0.0)
      throw IntegrityError(std::string("envelope bounds: ") + what + " is nonzero where int Theta vanishes; omega is wrong");
    c = std::max(c, num / integral[k]);
  }
  return c;
}

inline double spread(const std::vector<BoundEntry>& e, double BoundEntry::*field) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& x : e) {
    lo = std::min(lo, x.*field);
    hi = std::max(hi, x.*field);
  }
  if (hi == 0.0) return 1.0;
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

} // namespace detail

/// Smallest constants in |X^alpha| <= C1 int Theta and |Y^alpha| <= C2 int Theta^2 for each
/// alpha in the list and alpha = 0 (where X^0, Y^0 are the variational solutions).
inline BoundReport envelope_bounds(const Problem& p, const PiecewiseControl& ubar, const PiecewiseControl& u,
                                  std::vector<double> alphas, const TimeGrid& grid, const Modulus& omega,
                                  double max_spread = 2.0) {
  detail::require_compatible(p, ubar, grid);
  const auto th = theta(ubar, u, omega);
  const double h = grid.step();
  std::vector<double> i1(grid.nodes(), 0.0), i2(grid.nodes(), 0.0);
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    i1[k + 1] = i1[k] + h * th[k];
    i2[k + 1] = i2[k] + h * th[k] * th[k];
  }
  const auto base = solve_state(p, ubar, grid);
  const auto X = solve_variational(p, base, ubar, u, grid);
  const auto Y = solve_second_variational(p, base, ubar, u, X, grid);

  if (std::find(alphas.begin(), alphas.end(), 0.0) == alphas.end()) alphas.insert(alphas.begin(), 0.0);
  BoundReport r;
  r.max_spread = max_spread;
  for (double a : alphas) {
    BoundEntry e{a, 0.0, 0.0};
    if (a == 0.0) {
      e.c1 = detail::envelope_constant(X.nodes(), i1, "X");
      e.c2 = detail::envelope_constant(Y.nodes(), i2, "Y");
    } else {
      detail::require_alpha(a);
      const auto mix = solve_state(p, RelaxedMixture(ubar, u, a), grid);
      const VectorSeries xa = detail::nodewise_quotient(mix.nodes(), base.nodes(), a);
      e.c1 = detail::envelope_constant(xa, i1, "X^alpha");
      e.c2 = detail::envelope_constant(detail::nodewise_quotient(xa, X.nodes(), a), i2, "Y^alpha");
    }
    r.entries.push_back(e);
  }
  r.c1_spread = detail::spread(r.entries, &BoundEntry::c1);
  r.c2_spread = detail::spread(r.entries, &BoundEntry::c2);
  return r;
}

} // namespace socv
