#pragma once

#include "socverify/errors.hpp"
#include "socverify/grid.hpp"
#include "socverify/problem.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace socv {

struct BuiltinProblem {
  Problem problem;
  std::shared_ptr<const ControlDomain> domain;
  PiecewiseControl candidate;
  double default_eta_pmp = 1e-6;
  std::string description;
};

namespace detail {

inline std::shared_ptr<const ControlDomain> five_point_domain() {
  static const auto d = std::make_shared<const ControlDomain>(ControlDomain::real_line({-1.0, -0.5, 0.0, 0.5, 1.0}));
  return d;
}

inline Vec scalar_vec(double v) { return Vec::Constant(1, v); }
inline Mat scalar_mat(double v) { return Mat::Constant(1, 1, v); }

/// x' = u, f0 = sign * x^2, x0 = 0 on the five-point domain; candidate u = 0.
inline BuiltinProblem integrator_square(const std::string& id, double sign, std::size_t intervals) {
  Problem p;
  p.id = id;
  p.name = sign < 0 ? "integrator-neg-square" : "integrator-pos-square";
  p.horizon = 1.0;
  p.x0 = scalar_vec(0.0);
  p.dynamics = [](double, const Vec&, const DomainPoint& u) { return scalar_vec(u.scalar()); };
  p.running_cost = [sign](double, const Vec& x, const DomainPoint&) { return sign * x(0) * x(0); };
  p.jacobian = [](double, const Vec&, const DomainPoint&) { return scalar_mat(0.0); };
  p.cost_gradient = [sign](double, const Vec& x, const DomainPoint&) { return scalar_vec(2.0 * sign * x(0)); };
  p.hessians = [sign](double, const Vec&, const DomainPoint&) {
    return std::vector<Mat>{scalar_mat(2.0 * sign), scalar_mat(0.0)};
  };
  p.lipschitz = 10.0;
  p.modulus = Modulus::linear(1.0, "omega(r) = r");
  p.audit_box = 5.0;
  auto dom = five_point_domain();
  const std::size_t zero = dom->nearest_scalar(0.0);
  BuiltinProblem b{p, dom, PiecewiseControl::constant(dom, intervals, zero), 1e-6, ""};
  b.description = sign < 0 ? "x' = u, f0 = -x^2, x(0) = 0, U = {-1, -0.5, 0, 0.5, 1}; u = 0 is singular, not optimal"
                           : "x' = u, f0 = x^2, x(0) = 0, U = {-1, -0.5, 0, 0.5, 1}; u = 0 is optimal";
  return b;
}

/// Feedback u = -P x with P(t) = tanh(T - t), applied per interval at the midpoint and
/// snapped to the domain. f = u makes x exact under any per-interval constant control.
inline PiecewiseControl riccati_candidate(const std::shared_ptr<const ControlDomain>& dom, double horizon,
                                          double x0, std::size_t intervals) {
  const TimeGrid grid(horizon, intervals);
  const double h = grid.step();
  std::vector<std::size_t> idx(intervals);
  double x = x0;
  for (std::size_t k = 0; k < intervals; ++k) {
    const double pm = std::tanh(horizon - grid.midpoint(k));
    idx[k] = dom->nearest_scalar(-pm * x / (1.0 + 0.5 * pm * h));
    x += h * dom->point(idx[k]).scalar();
  }
  return PiecewiseControl(dom, std::move(idx));
}

inline BuiltinProblem scalar_lq(std::size_t intervals, std::size_t samples) {
  Problem p;
  p.id = "P3";
  p.name = "scalar-LQ";
  p.horizon = 1.0;
  p.x0 = scalar_vec(1.0);
  p.dynamics = [](double, const Vec&, const DomainPoint& u) { return scalar_vec(u.scalar()); };
  p.running_cost = [](double, const Vec& x, const DomainPoint& u) { return x(0) * x(0) + u.scalar() * u.scalar(); };
  p.jacobian = [](double, const Vec&, const DomainPoint&) { return scalar_mat(0.0); };
  p.cost_gradient = [](double, const Vec& x, const DomainPoint&) { return scalar_vec(2.0 * x(0)); };
  p.hessians = [](double, const Vec&, const DomainPoint&) {
    return std::vector<Mat>{scalar_mat(2.0), scalar_mat(0.0)};
  };
  p.lipschitz = 10.0;
  // |(u^2 - v^2, u - v)| = |u - v| sqrt((u + v)^2 + 1) <= sqrt(17) |u - v| on [-2, 2]
  p.modulus = Modulus::linear(std::sqrt(17.0), "omega(r) = sqrt(17) r");
  p.audit_box = 5.0;
  auto dom = std::make_shared<const ControlDomain>(ControlDomain::uniform_interval(-2.0, 2.0, samples));
  BuiltinProblem b{p, dom, riccati_candidate(dom, p.horizon, 1.0, intervals), 2e-3, ""};
  b.description = "x' = u, f0 = x^2 + u^2, x(0) = 1, U = [-2, 2] sampled at " + std::to_string(samples) +
                  " points; candidate is the sampled Riccati feedback";
  return b;
}

} // namespace detail

inline const std::vector<std::string>& builtin_ids() {
  static const std::vector<std::string> ids{"P1", "P2", "P3"};
  return ids;
}

/// `samples` (M) only affects P3.
inline BuiltinProblem builtin_problem(const std::string& id, std::size_t intervals = 1000, std::size_t samples = 401) {
  if (intervals == 0) throw ConfigError("builtin_problem: grid needs at least one interval");
  if (id == "P1") return detail::integrator_square("P1", -1.0, intervals);
  if (id == "P2") return detail::integrator_square("P2", 1.0, intervals);
  if (id == "P3") {
    if (samples < 2) throw ConfigError("builtin_problem: P3 needs at least two domain samples");
    return detail::scalar_lq(intervals, samples);
  }
  throw ConfigError("unknown problem id '" + id + "'");
}

} // namespace socv
