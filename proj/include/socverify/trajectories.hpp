#pragma once

#include "socverify/errors.hpp"
#include "socverify/grid.hpp"
#include "socverify/linalg.hpp"
#include "socverify/ode.hpp"
#include "socverify/problem.hpp"
#include "socverify/quadrature.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace socv {

/// State path x(.) of a plain control or a two-point mixture, with its cost J.
struct TrajectoryBundle {
  StagePath<Vec> x;
  double cost = 0.0;
  std::string control_desc;

  const VectorSeries& nodes() const noexcept { return x.nodes(); }
};

/// A priori bound (|x0| + L T) e^{L T} on every relaxed trajectory.
inline double reachability_bound(const Problem& p) {
  const double lt = p.lipschitz * p.horizon;
  return (p.x0.norm() + lt) * std::exp(lt);
}

/// Lipschitz-in-time constant L (1 + (|x0| + L T) e^{L T}) of every relaxed trajectory.
inline double time_lipschitz_bound(const Problem& p) { return p.lipschitz * (1.0 + reachability_bound(p)); }

namespace detail {

inline void require_compatible(const Problem& p, const PiecewiseControl& c, const TimeGrid& grid) {
  if (c.intervals() != grid.intervals())
    throw DomainError("control has " + std::to_string(c.intervals()) + " intervals but the grid has " +
                      std::to_string(grid.intervals()));
  if (std::abs(grid.horizon() - p.horizon) > 1e-12 * p.horizon)
    throw DomainError("time grid horizon does not match the problem horizon");
}

inline void require_pair(const PiecewiseControl& base, const PiecewiseControl& probe) {
  if (!base.compatible_with(probe)) throw DomainError("controls must share grid and domain");
}

inline Mat hamiltonian_hessian(const std::vector<Mat>& hess, const Vec& psi) {
  Mat h = -hess[0];
  for (Eigen::Index i = 0; i < psi.size(); ++i) h += psi(i) * hess[static_cast<std::size_t>(i) + 1];
  return h;
}

inline TrajectoryBundle solve_blend(const Problem& p, const PiecewiseControl& base, const PiecewiseControl& probe,
                                    double alpha, const TimeGrid& grid, std::string desc) {
  require_compatible(p, base, grid);
  require_pair(base, probe);
  const bool pure_base = alpha == 0.0;
  const bool pure_probe = alpha == 1.0;
  auto field = [&](const Stage& s, const Vec& x) -> Vec {
    if (pure_base) return p.dynamics(s.t, x, base.point(s.interval));
    if (pure_probe) return p.dynamics(s.t, x, probe.point(s.interval));
    return (1.0 - alpha) * p.dynamics(s.t, x, base.point(s.interval)) +
           alpha * p.dynamics(s.t, x, probe.point(s.interval));
  };
  TrajectoryBundle b{integrate_path<Vec>(field, p.x0, grid), 0.0, std::move(desc)};
  b.cost = quad_piecewise(grid, [&](const Stage& s) {
    const Vec& x = b.x.at(s);
    if (pure_base) return p.running_cost(s.t, x, base.point(s.interval));
    if (pure_probe) return p.running_cost(s.t, x, probe.point(s.interval));
    return (1.0 - alpha) * p.running_cost(s.t, x, base.point(s.interval)) +
           alpha * p.running_cost(s.t, x, probe.point(s.interval));
  });
  if (!std::isfinite(b.cost)) throw EvaluationError("solve_state: non-finite cost");
  return b;
}

} // namespace detail

inline TrajectoryBundle solve_state(const Problem& p, const PiecewiseControl& c, const TimeGrid& grid) {
  return detail::solve_blend(p, c, c, 0.0, grid, "plain");
}

inline TrajectoryBundle solve_state(const Problem& p, const RelaxedMixture& m, const TimeGrid& grid) {
  return detail::solve_blend(p, m.base(), m.probe(), m.alpha(), grid,
                             "mixture alpha=" + detail::format_double(m.alpha()));
}

/// psi' = -J^T psi + grad f0 along (xbar, ubar), psi(T) = 0.
inline StagePath<Vec> solve_adjoint(const Problem& p, const TrajectoryBundle& base, const PiecewiseControl& ubar,
                                    const TimeGrid& grid) {
  detail::require_compatible(p, ubar, grid);
  auto field = [&](const Stage& s, const Vec& psi) -> Vec {
    const Vec& x = base.x.at(s);
    const DomainPoint& u = ubar.point(s.interval);
    return -p.jacobian(s.t, x, u).transpose() * psi + p.cost_gradient(s.t, x, u);
  };
  return integrate_path<Vec>(field, Vec::Zero(static_cast<Eigen::Index>(p.dim())), grid, Direction::backward);
}

struct SecondAdjoint {
  StagePath<Mat> W;
  /// max over nodes of max|W - W^T| before symmetrization
  double asymmetry = 0.0;
};

/// W' + J^T W + W J + H_xx = 0, W(T) = 0, with H_xx = sum_i psi_i f^i_xx - f^0_xx.
inline SecondAdjoint solve_second_adjoint(const Problem& p, const TrajectoryBundle& base,
                                          const PiecewiseControl& ubar, const StagePath<Vec>& psi,
                                          const TimeGrid& grid, double asymmetry_tol = 1e-8) {
  detail::require_compatible(p, ubar, grid);
  auto field = [&](const Stage& s, const Mat& w) -> Mat {
    const Vec& x = base.x.at(s);
    const DomainPoint& u = ubar.point(s.interval);
    const Mat j = p.jacobian(s.t, x, u);
    const Mat hxx = detail::hamiltonian_hessian(p.hessians(s.t, x, u), psi.at(s));
    return -(j.transpose() * w + w * j + hxx);
  };
  const auto n = static_cast<Eigen::Index>(p.dim());
  auto raw = integrate<Mat>(field, Mat::Zero(n, n), grid, Direction::backward);
  double asym = 0.0;
  std::vector<Mat> sym;
  sym.reserve(raw.size());
  for (const Mat& w : raw.values()) {
    asym = std::max(asym, max_abs(Mat(w - w.transpose())));
    sym.emplace_back(0.5 * (w + w.transpose()));
  }
  if (asym > asymmetry_tol)
    throw IntegrityError("second-order adjoint asymmetry " + detail::format_double(asym) + " exceeds " +
                         detail::format_double(asymmetry_tol));
  auto path = hermite_path(MatrixSeries(grid, std::move(sym)), field);
  std::vector<Mat> mid;
  mid.reserve(path.midpoints().size());
  for (const Mat& m : path.midpoints()) mid.emplace_back(0.5 * (m + m.transpose()));
  return {StagePath<Mat>(path.nodes(), std::move(mid)), asym};
}

struct Fundamental {
  StagePath<Mat> phi;
  StagePath<Mat> phi_inv;
  /// max over nodes of ||Phi Psi - I||_inf
  double inverse_defect = 0.0;
  std::size_t worst_node = 0;
};

/// Phi' = J Phi, Phi(0) = I, and independently Psi' = -Psi J, Psi(0) = I.
inline Fundamental solve_fundamental(const Problem& p, const TrajectoryBundle& base, const PiecewiseControl& ubar,
                                     const TimeGrid& grid, double tol_inv = 1e-8) {
  detail::require_compatible(p, ubar, grid);
  auto jac = [&](const Stage& s) { return p.jacobian(s.t, base.x.at(s), ubar.point(s.interval)); };
  auto phi_field = [&](const Stage& s, const Mat& m) -> Mat { return jac(s) * m; };
  auto inv_field = [&](const Stage& s, const Mat& m) -> Mat { return -(m * jac(s)); };
  const auto n = static_cast<Eigen::Index>(p.dim());
  const Mat eye = Mat::Identity(n, n);
  Fundamental f{integrate_path<Mat>(phi_field, eye, grid), integrate_path<Mat>(inv_field, eye, grid), 0.0, 0};
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    const double d = inf_norm(Mat(f.phi[k] * f.phi_inv[k] - eye));
    if (d > f.inverse_defect) {
      f.inverse_defect = d;
      f.worst_node = k;
    }
  }
  if (f.inverse_defect > tol_inv)
    throw ConditioningError("fundamental matrix inverse check failed at node " + std::to_string(f.worst_node) +
                                ": ||Phi Psi - I|| = " + detail::format_double(f.inverse_defect),
                            f.worst_node);
  return f;
}

namespace detail {

inline Vec control_increment(const Problem& p, const Stage& s, const Vec& x, const PiecewiseControl& ubar,
                             const PiecewiseControl& u) {
  return p.dynamics(s.t, x, u.point(s.interval)) - p.dynamics(s.t, x, ubar.point(s.interval));
}

} // namespace detail

/// X' = J(xbar, ubar) X + f(xbar, u) - f(xbar, ubar), X(0) = 0.
inline StagePath<Vec> solve_variational(const Problem& p, const TrajectoryBundle& base, const PiecewiseControl& ubar,
                                        const PiecewiseControl& u, const TimeGrid& grid) {
  detail::require_compatible(p, ubar, grid);
  detail::require_pair(ubar, u);
  auto field = [&](const Stage& s, const Vec& X) -> Vec {
    const Vec& x = base.x.at(s);
    return p.jacobian(s.t, x, ubar.point(s.interval)) * X + detail::control_increment(p, s, x, ubar, u);
  };
  return integrate_path<Vec>(field, Vec::Zero(static_cast<Eigen::Index>(p.dim())), grid);
}

/// Y' = J(ubar) Y + (J(u) - J(ubar)) X + 1/2 (X^T f^k_xx(ubar) X)_k, Y(0) = 0.
inline StagePath<Vec> solve_second_variational(const Problem& p, const TrajectoryBundle& base,
                                               const PiecewiseControl& ubar, const PiecewiseControl& u,
                                               const StagePath<Vec>& X, const TimeGrid& grid) {
  detail::require_compatible(p, ubar, grid);
  detail::require_pair(ubar, u);
  const auto n = static_cast<Eigen::Index>(p.dim());
  auto field = [&](const Stage& s, const Vec& Y) -> Vec {
    const Vec& x = base.x.at(s);
    const DomainPoint& ub = ubar.point(s.interval);
    const Vec& xs = X.at(s);
    const Mat jb = p.jacobian(s.t, x, ub);
    const Mat ju = p.jacobian(s.t, x, u.point(s.interval));
    const std::vector<Mat> hess = p.hessians(s.t, x, ub);
    Vec quad_term(n);
    for (Eigen::Index k = 0; k < n; ++k) quad_term(k) = 0.5 * xs.dot(hess[static_cast<std::size_t>(k) + 1] * xs);
    return jb * Y + (ju - jb) * xs + quad_term;
  };
  return integrate_path<Vec>(field, Vec::Zero(n), grid);
}

/// X(t_k) = Phi(t_k) int_0^{t_k} Phi(s)^{-1} (f(s, xbar, u) - f(s, xbar, ubar)) ds.
inline VectorSeries x_via_transition(const Problem& p, const Fundamental& fund, const TrajectoryBundle& base,
                                     const PiecewiseControl& ubar, const PiecewiseControl& u, const TimeGrid& grid) {
  detail::require_compatible(p, ubar, grid);
  detail::require_pair(ubar, u);
  const auto n = static_cast<Eigen::Index>(p.dim());
  const double w = grid.step() / 6.0;
  auto g = [&](const Stage& s) -> Vec {
    return fund.phi_inv.at(s) * detail::control_increment(p, s, base.x.at(s), ubar, u);
  };
  std::vector<Vec> out;
  out.reserve(grid.nodes());
  Vec acc = Vec::Zero(n);
  out.push_back(fund.phi[0] * acc);
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    acc += w * (g(stage_left(grid, k)) + 4.0 * g(stage_mid(grid, k)) + g(stage_right(grid, k)));
    out.push_back(fund.phi[k + 1] * acc);
  }
  return VectorSeries(grid, std::move(out));
}

/// M' = J M + M J^T + df X^T + X df^T, M(0) = 0: the ODE satisfied by X X^T.
inline MatrixSeries solve_outer_product(const Problem& p, const TrajectoryBundle& base, const PiecewiseControl& ubar,
                                        const PiecewiseControl& u, const StagePath<Vec>& X, const TimeGrid& grid) {
  detail::require_compatible(p, ubar, grid);
  const auto n = static_cast<Eigen::Index>(p.dim());
  auto field = [&](const Stage& s, const Mat& m) -> Mat {
    const Vec& x = base.x.at(s);
    const Mat j = p.jacobian(s.t, x, ubar.point(s.interval));
    const Vec df = detail::control_increment(p, s, x, ubar, u);
    const Vec& xs = X.at(s);
    return j * m + m * j.transpose() + df * xs.transpose() + xs * df.transpose();
  };
  return integrate<Mat>(field, Mat::Zero(n, n), grid);
}

/// A candidate control with its state and first-order adjoint.
struct CandidateSolution {
  Problem problem;
  TimeGrid grid;
  PiecewiseControl control;
  TrajectoryBundle state;
  StagePath<Vec> psi;
};

inline CandidateSolution solve_candidate(Problem p, PiecewiseControl ubar, const TimeGrid& grid) {
  check_problem(p);
  auto state = solve_state(p, ubar, grid);
  auto psi = solve_adjoint(p, state, ubar, grid);
  return CandidateSolution{std::move(p), grid, std::move(ubar), std::move(state), std::move(psi)};
}

} // namespace socv
