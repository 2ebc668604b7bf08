#pragma once

#include "socverify/errors.hpp"
#include "socverify/families.hpp"
#include "socverify/grid.hpp"
#include "socverify/pmp.hpp"
#include "socverify/problem.hpp"
#include "socverify/quadrature.hpp"
#include "socverify/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace socv {

/// Candidate plus its second-order adjoint W and the fundamental matrix pair, all on one grid.
struct SocKernelContext {
  CandidateSolution cand;
  StagePath<Mat> W;
  Fundamental fund;
  double w_asymmetry = 0.0;

  const Problem& problem() const noexcept { return cand.problem; }
  const TimeGrid& grid() const noexcept { return cand.grid; }
  const PiecewiseControl& ubar() const noexcept { return cand.control; }
};

inline SocKernelContext make_kernel_context(CandidateSolution cand, double tol_inv = 1e-8,
                                            double asymmetry_tol = 1e-8) {
  auto w = solve_second_adjoint(cand.problem, cand.state, cand.control, cand.psi, cand.grid, asymmetry_tol);
  auto fund = solve_fundamental(cand.problem, cand.state, cand.control, cand.grid, tol_inv);
  return SocKernelContext{std::move(cand), std::move(w.W), std::move(fund), w.asymmetry};
}

/// H_x = Jx^T psi - grad f0.
inline Vec hamiltonian_gradient(const Problem& p, double t, const Vec& x, const DomainPoint& u, const Vec& psi) {
  return p.jacobian(t, x, u).transpose() * psi - p.cost_gradient(t, x, u);
}

namespace detail {

struct Pair {
  Vec a;  // W (f(ubar) - f(v)) + H_x(ubar) - H_x(v)
  Vec df; // f(v) - f(ubar)
};

inline Pair kernel_pair(const Problem& p, double t, const Vec& x, const Vec& psi, const Mat& w, const DomainPoint& ub,
                        const DomainPoint& v) {
  const Vec df = p.dynamics(t, x, v) - p.dynamics(t, x, ub);
  return {Vec(-(w * df) + hamiltonian_gradient(p, t, x, ub, psi) - hamiltonian_gradient(p, t, x, v, psi)), df};
}

inline Pair stage_pair(const SocKernelContext& c, const Stage& s, const PiecewiseControl& u) {
  return kernel_pair(c.problem(), s.t, c.cand.state.x.at(s), c.cand.psi.at(s), c.W.at(s),
                     c.ubar().point(s.interval), u.point(s.interval));
}

inline Pair node_pair(const SocKernelContext& c, std::size_t k, std::size_t v) {
  return kernel_pair(c.problem(), c.grid().node(k), c.cand.state.x[k], c.cand.psi[k], c.W[k],
                     c.ubar().domain().point(c.ubar().index_at_node(k)), c.ubar().domain().point(v));
}

} // namespace detail

/// F(t, v) = Phi(t)^T [W(t)(f(ubar) - f(v)) + H_x(ubar) - H_x(v)] at node t_k.
inline Vec kernel_F(const SocKernelContext& c, std::size_t k, std::size_t v) {
  return c.fund.phi[k].transpose() * detail::node_pair(c, k, v).a;
}

/// G(s, v) = Phi(s)^{-1} (f(v) - f(ubar)) at node s_j.
inline Vec kernel_G(const SocKernelContext& c, std::size_t j, std::size_t v) {
  return c.fund.phi_inv[j] * detail::node_pair(c, j, v).df;
}

/// Q(u) = -int_0^T dt int_0^t <F(t, u(t)), G(s, u(s))> ds, oriented so that optimality requires Q <= 0.
/// The inner integral is the running integral C(t) of G, which makes the double integral separable.
inline double necessary_Q(const SocKernelContext& c, const PiecewiseControl& u) {
  detail::require_pair(c.ubar(), u);
  const TimeGrid& g = c.grid();
  const double h = g.step();
  const auto n = static_cast<Eigen::Index>(c.problem().dim());
  Vec acc = Vec::Zero(n);
  double q = 0.0;
  for (std::size_t k = 0; k < g.intervals(); ++k) {
    const Stage sl = stage_left(g, k), sm = stage_mid(g, k), sr = stage_right(g, k);
    const auto pl = detail::stage_pair(c, sl, u), pm = detail::stage_pair(c, sm, u), pr = detail::stage_pair(c, sr, u);
    const Vec gl = c.fund.phi_inv.at(sl) * pl.df;
    const Vec gm = c.fund.phi_inv.at(sm) * pm.df;
    const Vec gr = c.fund.phi_inv.at(sr) * pr.df;
    const Vec c_left = acc;
    acc += (h / 6.0) * (gl + 4.0 * gm + gr);
    const Vec c_mid = 0.5 * (c_left + acc) + (h / 8.0) * (gl - gr);
    const double il = (c.fund.phi.at(sl).transpose() * pl.a).dot(c_left);
    const double im = (c.fund.phi.at(sm).transpose() * pm.a).dot(c_mid);
    const double ir = (c.fund.phi.at(sr).transpose() * pr.a).dot(acc);
    q += (h / 6.0) * (il + 4.0 * im + ir);
  }
  return -q;
}

/// Same Q as a single integral -int <W (f(ubar) - f(u)) + H_x(ubar) - H_x(u), X> with X from the variational equation.
inline double necessary_Q_variational(const SocKernelContext& c, const PiecewiseControl& u) {
  detail::require_pair(c.ubar(), u);
  const auto X = solve_variational(c.problem(), c.cand.state, c.ubar(), u, c.grid());
  return -quad_piecewise(c.grid(), [&](const Stage& s) { return detail::stage_pair(c, s, u).a.dot(X.at(s)); });
}

/// Same Q from node kernels on the lower triangle (trapezoid inner rule), right-continuous controls.
inline double necessary_Q_triangle(const SocKernelContext& c, const PiecewiseControl& u) {
  detail::require_pair(c.ubar(), u);
  const TimeGrid& g = c.grid();
  std::vector<Vec> F, G;
  F.reserve(g.nodes());
  G.reserve(g.nodes());
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    F.push_back(kernel_F(c, k, u.index_at_node(k)));
    G.push_back(kernel_G(c, k, u.index_at_node(k)));
  }
  return -tri_double_integral([&](std::size_t k, std::size_t j) { return F[k].dot(G[j]); }, g);
}

struct PointwiseViolation {
  std::size_t node = 0;
  std::size_t v = 0;
  double value = 0.0; // D(t, v)
};

struct PointwiseReport {
  std::vector<PointwiseViolation> violations;
  double violation_measure = 0.0; // node measure of violating nodes
  double max_value = -std::numeric_limits<double>::infinity();
  double eta = 0.0;

  bool passed() const { return violation_measure == 0.0; }
};

/// D(t, v) = <W(f(ubar) - f(v)) + H_x(ubar) - H_x(v), f(ubar) - f(v)> scanned over the singular set.
inline double pointwise_value(const SocKernelContext& c, std::size_t k, std::size_t v) {
  const auto pr = detail::node_pair(c, k, v);
  return -pr.a.dot(pr.df);
}

inline PointwiseReport pointwise_test(const SocKernelContext& c, const SingularSet& set, double eta_soc = 1e-4) {
  if (set.nodes() != c.grid().nodes()) throw DomainError("pointwise_test: singular set lives on a different grid");
  PointwiseReport r;
  r.eta = eta_soc;
  for (std::size_t k = 0; k < set.nodes(); ++k) {
    bool bad = false;
    for (std::size_t v : set.members[k]) {
      const double d = pointwise_value(c, k, v);
      r.max_value = std::max(r.max_value, d);
      if (d > eta_soc) {
        r.violations.push_back({k, v, d});
        bad = true;
      }
    }
    if (bad) r.violation_measure += c.grid().node_weight(k);
  }
  return r;
}

struct TraceIdentity {
  double lhs = 0.0; // -1/2 int X^T H_xx X
  double rhs = 0.0; // int <W (f(ubar) - f(u)), X>
  double gap = 0.0; // |lhs - rhs| / max(|lhs|, |rhs|, 1e-12)
};

inline TraceIdentity trace_identity_check(const SocKernelContext& c, const PiecewiseControl& u, double tol = 1e-5) {
  detail::require_pair(c.ubar(), u);
  const Problem& p = c.problem();
  const auto X = solve_variational(p, c.cand.state, c.ubar(), u, c.grid());
  TraceIdentity r;
  r.lhs = -0.5 * quad_piecewise(c.grid(), [&](const Stage& s) {
    const Vec& x = c.cand.state.x.at(s);
    const Mat hxx = detail::hamiltonian_hessian(p.hessians(s.t, x, c.ubar().point(s.interval)), c.cand.psi.at(s));
    return X.at(s).dot(hxx * X.at(s));
  });
  r.rhs = quad_piecewise(c.grid(), [&](const Stage& s) {
    const Vec& x = c.cand.state.x.at(s);
    const Vec df = p.dynamics(s.t, x, c.ubar().point(s.interval)) - p.dynamics(s.t, x, u.point(s.interval));
    return (c.W.at(s) * df).dot(X.at(s));
  });
  r.gap = std::abs(r.lhs - r.rhs) / std::max({std::abs(r.lhs), std::abs(r.rhs), 1e-12});
  if (r.gap > tol)
    throw IntegrityError("trace identity gap " + detail::format_double(r.gap) + " exceeds " + detail::format_double(tol) +
                         " (lhs " + detail::format_double(r.lhs) + ", rhs " + detail::format_double(r.rhs) + ")");
  return r;
}

/// q2(alpha) = (J(mixture) - J(ubar)) / alpha^2 against the limit -Q(u).
inline OracleReport second_quotient_oracle(const SocKernelContext& c, const PiecewiseControl& u,
                                           const std::vector<double>& alphas) {
  OracleReport r;
  r.target = -necessary_Q(c, u);
  for (double a : alphas) {
    const double q = detail::mixture_quotient(c.cand, u, a, 2);
    r.entries.push_back({a, q, std::abs(q - r.target)});
  }
  detail::fill_rates(r);
  return r;
}

/// int_0^T omega(rho(u, ubar))^p, exact for piecewise-constant controls.
inline double theta_integral(const TimeGrid& grid, const PiecewiseControl& ubar, const PiecewiseControl& u,
                             const Modulus& omega, int power) {
  detail::require_pair(ubar, u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.intervals(); ++k) s += std::pow(omega(ubar.domain().distance(u[k], ubar[k])), power);
  return s * grid.step();
}

struct MemberFit {
  std::size_t index = 0;
  double Q = 0.0;
  double R = 0.0;     // int omega(rho)^2
  double ratio = 0.0; // -Q / R, NaN when R = 0
};

struct SufficientFit {
  std::vector<MemberFit> members;
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0; // family index attaining min_ratio
  std::optional<double> beta_hat; // set iff min_ratio > 0

  bool established() const { return beta_hat.has_value(); }
};

/// Fit from precomputed Q values (one per family member, same order).
inline SufficientFit sufficient_fit(const SocKernelContext& c, const ControlFamily& family, const std::vector<double>& Q,
                                    const Modulus& omega) {
  if (family.size() == 0) throw DegenerateFamilyError("sufficient_fit: empty family");
  if (Q.size() != family.size()) throw DomainError("sufficient_fit: one Q value per family member required");
  SufficientFit fit;
  bool any = false;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double R = theta_integral(c.grid(), c.ubar(), family.members[i], omega, 2);
    MemberFit m{i, Q[i], R, std::numeric_limits<double>::quiet_NaN()};
    if (R > 0.0) {
      m.ratio = -Q[i] / R;
      if (!any || m.ratio < fit.min_ratio) {
        fit.min_ratio = m.ratio;
        fit.argmin = i;
      }
      any = true;
    }
    fit.members.push_back(m);
  }
  if (!any) throw DegenerateFamilyError("sufficient_fit: every family member equals the candidate (R = 0)");
  if (fit.min_ratio > 0.0) fit.beta_hat = fit.min_ratio;
  return fit;
}

inline SufficientFit sufficient_fit(const SocKernelContext& c, const ControlFamily& family, const Modulus& omega) {
  std::vector<double> Q;
  Q.reserve(family.size());
  for (const auto& u : family.members) Q.push_back(necessary_Q(c, u));
  return sufficient_fit(c, family, Q, omega);
}

struct GrowthFailure {
  std::size_t index = 0;
  double delta_j = 0.0; // J(u) - J(ubar)
  double bound = 0.0;   // beta/2 int omega(rho)^2
};

struct GrowthReport {
  double beta = 0.0;
  double eps0 = 0.0;
  std::size_t checked = 0; // members inside V
  std::size_t outside = 0;
  double min_margin = std::numeric_limits<double>::infinity(); // min of delta_j - bound over V
  std::vector<GrowthFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// J(u) - J(ubar) >= (beta/2) int omega(rho)^2 - tol for members with int omega(rho) <= eps0.
inline GrowthReport growth_check(const SocKernelContext& c, const ControlFamily& family, double beta_hat,
                                 const Modulus& omega, double eps0, double tol_growth = 1e-6) {
  if (!(beta_hat > 0.0)) throw DomainError("growth_check: beta must be positive");
  GrowthReport r;
  r.beta = beta_hat;
  r.eps0 = eps0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const PiecewiseControl& u = family.members[i];
    if (theta_integral(c.grid(), c.ubar(), u, omega, 1) > eps0) {
      ++r.outside;
      continue;
    }
    ++r.checked;
    const double dj = solve_state(c.problem(), u, c.grid()).cost - c.cand.state.cost;
    const double bound = 0.5 * beta_hat * theta_integral(c.grid(), c.ubar(), u, omega, 2);
    r.min_margin = std::min(r.min_margin, dj - bound);
    if (dj < bound - tol_growth) r.failures.push_back({i, dj, bound});
  }
  return r;
}

/// Lower-triangle kernel matrix <F(t_k, u(t_k)), G(s_j, u(s_j))> on every stride-th node.
inline void export_kernel_csv(std::ostream& os, const SocKernelContext& c, const PiecewiseControl& u,
                              std::size_t stride = 10) {
  detail::require_pair(c.ubar(), u);
  stride = std::max<std::size_t>(1, stride);
  const TimeGrid& g = c.grid();
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < g.nodes(); k += stride) idx.push_back(k);
  std::vector<Vec> F, G;
  for (std::size_t k : idx) {
    F.push_back(kernel_F(c, k, u.index_at_node(k)));
    G.push_back(kernel_G(c, k, u.index_at_node(k)));
  }
  os << "t\\s";
  for (std::size_t j : idx) os << ',' << detail::format_double(g.node(j));
  os << '\n';
  for (std::size_t a = 0; a < idx.size(); ++a) {
    os << detail::format_double(g.node(idx[a]));
    for (std::size_t b = 0; b < idx.size(); ++b) {
      os << ',';
      if (b <= a) os << detail::format_double(F[a].dot(G[b]));
    }
    os << '\n';
  }
}

} // namespace socv
