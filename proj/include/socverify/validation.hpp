#pragma once

#include "socverify/errors.hpp"
#include "socverify/linalg.hpp"
#include "socverify/problem.hpp"
#include "socverify/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace socv {

struct EvalSample {
  double t = 0.0;
  Vec x;
  std::size_t u = 0; // domain index
};

/// Seeded samples with t uniform on [0, T], x uniform on the box |x|_inf <= box, u uniform over the domain.
inline std::vector<EvalSample> draw_samples(const Problem& p, const ControlDomain& domain, std::size_t count,
                                            std::uint64_t seed, double box) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(0.0, p.horizon);
  std::uniform_real_distribution<double> ux(-box, box);
  std::uniform_int_distribution<std::size_t> uu(0, domain.size() - 1);
  const auto n = static_cast<Eigen::Index>(p.dim());
  std::vector<EvalSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    EvalSample s;
    s.t = ut(rng);
    s.x.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) s.x(k) = ux(rng);
    s.u = uu(rng);
    out.push_back(std::move(s));
  }
  return out;
}

struct ValidationReport {
  double max_jacobian_error = 0.0;
  double max_gradient_error = 0.0;
  double max_hessian_error = 0.0;
  std::vector<std::size_t> flagged; // sample indices with any error above tol
  std::size_t sample_count = 0;
  double tol = 0.0;

  double max_error() const { return std::max({max_jacobian_error, max_gradient_error, max_hessian_error}); }
  bool passed() const { return flagged.empty(); }
};

namespace detail {

inline double rel_error(double fd, double an) { return std::abs(fd - an) / (1.0 + std::abs(an)); }

inline double rel_error(const Mat& fd, const Mat& an) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < fd.rows(); ++i)
    for (Eigen::Index j = 0; j < fd.cols(); ++j) e = std::max(e, rel_error(fd(i, j), an(i, j)));
  return e;
}

} // namespace detail

/// Central differences of f and f0 against Jx and grad0; central differences of the
/// analytic Jx rows and grad0 against the hessians. Error measure |fd - an| / (1 + |an|).
inline ValidationReport validate_derivatives(const Problem& p, const ControlDomain& domain,
                                             const std::vector<EvalSample>& samples, double h, double tol = 1e-6) {
  if (!(h > 0.0)) throw DomainError("validate_derivatives: step h must be positive");
  const auto n = static_cast<Eigen::Index>(p.dim());
  ValidationReport r;
  r.sample_count = samples.size();
  r.tol = tol;
  for (std::size_t si = 0; si < samples.size(); ++si) {
    const EvalSample& s = samples[si];
    const DomainPoint& u = domain.point(s.u);
    const DynamicsEval e = eval_stack(p, s.t, s.x, u);
    Mat jfd(n, n), gfd(n, 1);
    std::vector<Mat> hfd(static_cast<std::size_t>(n) + 1, Mat(n, n));
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec xp = s.x, xm = s.x;
      xp(j) += h;
      xm(j) -= h;
      const DynamicsEval ep = eval_stack(p, s.t, xp, u);
      const DynamicsEval em = eval_stack(p, s.t, xm, u);
      jfd.col(j) = (ep.f - em.f) / (2.0 * h);
      gfd(j, 0) = (ep.f0 - em.f0) / (2.0 * h);
      hfd[0].col(j) = (ep.grad0 - em.grad0) / (2.0 * h);
      for (Eigen::Index k = 0; k < n; ++k)
        hfd[static_cast<std::size_t>(k) + 1].col(j) = (ep.jac.row(k) - em.jac.row(k)).transpose() / (2.0 * h);
    }
    const double ej = detail::rel_error(jfd, e.jac);
    const double eg = detail::rel_error(gfd, Mat(e.grad0));
    double eh = 0.0;
    for (std::size_t k = 0; k < hfd.size(); ++k) eh = std::max(eh, detail::rel_error(hfd[k], e.hessians[k]));
    r.max_jacobian_error = std::max(r.max_jacobian_error, ej);
    r.max_gradient_error = std::max(r.max_gradient_error, eg);
    r.max_hessian_error = std::max(r.max_hessian_error, eh);
    if (ej > tol || eg > tol || eh > tol) r.flagged.push_back(si);
  }
  return r;
}

/// Empirical constants and sampled violations of the declared L and omega.
/// Bold quantities stack the cost on top of the dynamics: Bf = (f0, f), BJ = (grad0^T; Jx).
struct RegularityReport {
  double box = 0.0;
  std::size_t sample_count = 0;
  double state_lipschitz = 0.0;    // max |Bf(x) - Bf(xh)| / |x - xh|
  double origin_bound = 0.0;       // max |Bf(t, 0, u)|
  double jacobian_lipschitz = 0.0; // max |BJ(x) - BJ(xh)|_F / |x - xh|
  double omega_constant = 0.0;     // max over rho > 0 of the control increments of Bf, BJ divided by rho
  std::size_t lipschitz_violations = 0;
  std::size_t origin_violations = 0;
  std::size_t jacobian_violations = 0;
  std::size_t omega_violations = 0;
  std::size_t hessian_violations = 0;
  std::string modulus_description;

  double empirical_lipschitz() const { return std::max({state_lipschitz, origin_bound, jacobian_lipschitz}); }
  std::size_t violations() const {
    return lipschitz_violations + origin_violations + jacobian_violations + omega_violations + hessian_violations;
  }
  bool passed() const { return violations() == 0; }
};

namespace detail {

inline Vec bold_f(const DynamicsEval& e) {
  Vec v(e.f.size() + 1);
  v(0) = e.f0;
  v.tail(e.f.size()) = e.f;
  return v;
}

inline Mat bold_jac(const DynamicsEval& e) {
  Mat m(e.jac.rows() + 1, e.jac.cols());
  m.row(0) = e.grad0.transpose();
  m.bottomRows(e.jac.rows()) = e.jac;
  return m;
}

inline bool exceeds(double value, double bound) { return value > bound * (1.0 + 1e-9) + 1e-12; }

} // namespace detail

inline double default_audit_box(const Problem& p, std::optional<double> box) {
  if (box) return *box;
  if (p.audit_box) return *p.audit_box;
  return reachability_bound(p);
}

/// Pairs (x, xh) are drawn on the box, (u, uh) over the domain. The box defaults to the
/// problem's declared audit box, then to the a priori trajectory bound.
inline RegularityReport audit_regularity(const Problem& p, const ControlDomain& domain, std::size_t sample_count,
                                         std::uint64_t seed, std::optional<double> box = std::nullopt) {
  if (sample_count < 2) throw DomainError("audit_regularity: need at least two samples");
  RegularityReport r;
  r.box = default_audit_box(p, box);
  r.sample_count = sample_count;
  const std::optional<Modulus> omega = p.modulus;
  r.modulus_description = omega ? omega->description : "none declared";
  const double L = p.lipschitz;
  const auto n = static_cast<Eigen::Index>(p.dim());
  auto a = draw_samples(p, domain, sample_count, seed, r.box);
  auto b = draw_samples(p, domain, sample_count, seed ^ 0x9e3779b97f4a7c15ULL, r.box);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double t = a[i].t;
    const DomainPoint& u = domain.point(a[i].u);
    const DomainPoint& uh = domain.point(b[i].u);
    const DynamicsEval exu = eval_stack(p, t, a[i].x, u);
    const DynamicsEval ehu = eval_stack(p, t, b[i].x, u);
    const DynamicsEval exuh = eval_stack(p, t, a[i].x, uh);
    const DynamicsEval e0 = eval_stack(p, t, Vec::Zero(n), u);

    const double dx = (a[i].x - b[i].x).norm();
    if (dx > 0.0) {
      const double df = (detail::bold_f(exu) - detail::bold_f(ehu)).norm();
      const double dj = (detail::bold_jac(exu) - detail::bold_jac(ehu)).norm();
      r.state_lipschitz = std::max(r.state_lipschitz, df / dx);
      r.jacobian_lipschitz = std::max(r.jacobian_lipschitz, dj / dx);
      if (detail::exceeds(df, L * dx)) ++r.lipschitz_violations;
      if (detail::exceeds(dj, L * dx)) ++r.jacobian_violations;
    }
    const double f_origin = detail::bold_f(e0).norm();
    r.origin_bound = std::max(r.origin_bound, f_origin);
    if (detail::exceeds(f_origin, L)) ++r.origin_violations;

    const double rho = domain.distance(a[i].u, b[i].u);
    const double duf = (detail::bold_f(exu) - detail::bold_f(exuh)).norm();
    const double duj = (detail::bold_jac(exu) - detail::bold_jac(exuh)).norm();
    if (rho > 0.0) r.omega_constant = std::max(r.omega_constant, std::max(duf, duj) / rho);
    if (omega) {
      const double w = (*omega)(rho);
      if (detail::exceeds(duf, w) || detail::exceeds(duj, w)) ++r.omega_violations;
      const DynamicsEval ehuh = eval_stack(p, t, b[i].x, uh);
      const double wj = (*omega)(dx + rho);
      for (std::size_t k = 0; k < exu.hessians.size(); ++k) {
        if (detail::exceeds((exu.hessians[k] - ehuh.hessians[k]).norm(), wj)) {
          ++r.hessian_violations;
          break;
        }
      }
    }
  }
  return r;
}

/// The declared modulus, or omega(r) = C r with C estimated by the audit.
inline Modulus effective_modulus(const Problem& p, const ControlDomain& domain, std::size_t sample_count = 10000,
                                 std::uint64_t seed = 0) {
  if (p.modulus) return *p.modulus;
  const RegularityReport r = audit_regularity(p, domain, sample_count, seed);
  return Modulus::linear(r.omega_constant, "linear, constant estimated from " + std::to_string(sample_count) +
                                               " samples: omega(r) = " + detail::format_double(r.omega_constant) +
                                               " * r");
}

} // namespace socv
