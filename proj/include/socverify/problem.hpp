#pragma once

#include "socverify/errors.hpp"
#include "socverify/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace socv {

/// Opaque control value handed to the dynamics. Scalar domains use payload[0].
struct DomainPoint {
  std::vector<double> payload;

  double scalar() const { return payload.at(0); }
  friend bool operator==(const DomainPoint&, const DomainPoint&) = default;
};

/// Finite sample of a metric control space (U, rho). Distances are tabulated at construction.
class ControlDomain {
public:
  using Metric = std::function<double(const DomainPoint&, const DomainPoint&)>;

  ControlDomain(std::vector<DomainPoint> points, const Metric& metric,
                std::vector<std::string> labels = {})
      : points_(std::move(points)), labels_(std::move(labels)) {
    if (points_.empty()) throw DomainError("control domain must contain at least one point");
    if (labels_.empty()) {
      labels_.reserve(points_.size());
      for (const auto& p : points_) labels_.push_back(default_label(p));
    }
    if (labels_.size() != points_.size())
      throw DomainError("control domain: label count does not match point count");

    const std::size_t m = points_.size();
    dist_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double d = metric(points_[i], points_[j]);
        if (!std::isfinite(d) || d < 0.0)
          throw DomainError("control domain: metric returned a negative or non-finite distance");
        dist_[i * m + j] = d;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (dist_[i * m + i] != 0.0) throw DomainError("control domain: rho(u,u) != 0");
      for (std::size_t j = i + 1; j < m; ++j) {
        if (dist_[i * m + j] != dist_[j * m + i])
          throw DomainError("control domain: metric is not symmetric");
      }
    }
  }

  /// Points on the real line with rho(a, b) = |a - b|.
  static ControlDomain real_line(const std::vector<double>& values) {
    std::vector<DomainPoint> pts;
    pts.reserve(values.size());
    for (double v : values) pts.push_back(DomainPoint{{v}});
    return ControlDomain(std::move(pts), [](const DomainPoint& a, const DomainPoint& b) {
      return std::abs(a.scalar() - b.scalar());
    });
  }

  /// `count` equispaced points on [lo, hi] (endpoints included).
  static ControlDomain uniform_interval(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo)) throw DomainError("uniform_interval: need count >= 2 and hi > lo");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
      v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return real_line(v);
  }

  std::size_t size() const noexcept { return points_.size(); }

  const DomainPoint& point(std::size_t i) const {
    check(i);
    return points_[i];
  }

  const std::string& label(std::size_t i) const {
    check(i);
    return labels_[i];
  }

  double distance(std::size_t i, std::size_t j) const {
    check(i);
    check(j);
    return dist_[i * size() + j];
  }

  /// Index of the scalar point closest to `value`; lowest index wins ties.
  std::size_t nearest_scalar(double value) const {
    std::size_t best = 0;
    double best_d = std::abs(points_[0].scalar() - value);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double d = std::abs(points_[i].scalar() - value);
      if (d < best_d) {
        best = i;
        best_d = d;
      }
    }
    return best;
  }

private:
  void check(std::size_t i) const {
    if (i >= points_.size())
      throw DomainError("control domain index " + std::to_string(i) + " out of range (size " +
                        std::to_string(points_.size()) + ")");
  }

  static std::string default_label(const DomainPoint& p) {
    std::string s;
    for (std::size_t k = 0; k < p.payload.size(); ++k) {
      if (k) s += ' ';
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", p.payload[k]);
      s += buf;
    }
    return s;
  }

  std::vector<DomainPoint> points_;
  std::vector<std::string> labels_;
  std::vector<double> dist_;
};

inline double domain_distance(const ControlDomain& domain, std::size_t i, std::size_t j) {
  return domain.distance(i, j);
}

struct MetricAxiomReport {
  double max_triangle_excess = 0.0; // max over triples of rho(i,j) - rho(i,k) - rho(k,j)
  std::size_t triangle_violations = 0;
  bool passed() const { return triangle_violations == 0; }
};

/// Exhaustive triangle-inequality scan (O(M^3)). Symmetry and zero diagonal are
/// enforced by the ControlDomain constructor.
inline MetricAxiomReport verify_metric_axioms(const ControlDomain& d, double tol = 1e-12) {
  MetricAxiomReport r;
  const std::size_t m = d.size();
  r.max_triangle_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) {
        const double excess = d.distance(i, j) - d.distance(i, k) - d.distance(k, j);
        r.max_triangle_excess = std::max(r.max_triangle_excess, excess);
        if (excess > tol) ++r.triangle_violations;
      }
  return r;
}

/// Modulus of continuity omega: nondecreasing, omega(0) = 0.
struct Modulus {
  std::function<double(double)> eval;
  std::string description;

  double operator()(double r) const { return eval(r); }

  static Modulus linear(double c, std::string description = {}) {
    if (description.empty()) description = "linear: omega(r) = " + std::to_string(c) + " * r";
    return Modulus{[c](double r) { return c * r; }, std::move(description)};
  }
};

/// One ODE-constrained control problem
///   x' = f(t, x, u), x(0) = x0, J(u) = int_0^T f0(t, x, u) dt.
/// jacobian is the plain Jacobian df/dx (row i = gradient of f^i). hessians returns
/// n + 1 matrices: index 0 is d^2 f0/dx^2, index k is d^2 f^k/dx^2.
struct Problem {
  using VecFn = std::function<Vec(double, const Vec&, const DomainPoint&)>;
  using ScalarFn = std::function<double(double, const Vec&, const DomainPoint&)>;
  using MatFn = std::function<Mat(double, const Vec&, const DomainPoint&)>;
  using HessFn = std::function<std::vector<Mat>(double, const Vec&, const DomainPoint&)>;

  std::string id;
  std::string name;
  double horizon = 1.0;
  Vec x0;
  VecFn dynamics;
  ScalarFn running_cost;
  MatFn jacobian;
  VecFn cost_gradient;
  HessFn hessians;
  double lipschitz = 1.0;
  std::optional<Modulus> modulus;
  /// State box |x|_inf <= audit_box on which lipschitz and modulus are claimed to hold.
  std::optional<double> audit_box;

  std::size_t dim() const { return static_cast<std::size_t>(x0.size()); }
};

inline void check_problem(const Problem& p) {
  if (!(p.horizon > 0.0) || !std::isfinite(p.horizon)) throw ConfigError("problem horizon must be positive");
  if (p.x0.size() == 0) throw ConfigError("problem state dimension must be positive");
  if (!p.x0.allFinite()) throw ConfigError("problem x0 must be finite");
  if (!p.dynamics || !p.running_cost || !p.jacobian || !p.cost_gradient || !p.hessians)
    throw ConfigError("problem '" + p.id + "' is missing a model callback");
  if (!(p.lipschitz > 0.0)) throw ConfigError("problem Lipschitz constant must be positive");
}

/// Everything the checks need at one (t, x, u).
struct DynamicsEval {
  Vec f;
  double f0 = 0.0;
  Mat jac;
  Vec grad0;
  std::vector<Mat> hessians;
};

inline DynamicsEval eval_stack(const Problem& p, double t, const Vec& x, const DomainPoint& u) {
  const double slack = 1e-12 * p.horizon;
  if (t < -slack || t > p.horizon + slack)
    throw DomainError("eval_stack: t = " + std::to_string(t) + " outside [0, T]");
  const auto n = static_cast<Eigen::Index>(p.dim());
  DynamicsEval e;
  e.f = p.dynamics(t, x, u);
  if (e.f.size() != n || !e.f.allFinite()) throw EvaluationError("eval_stack: dynamics f is non-finite or mis-shaped");
  e.f0 = p.running_cost(t, x, u);
  if (!std::isfinite(e.f0)) throw EvaluationError("eval_stack: running cost f0 is non-finite");
  e.jac = p.jacobian(t, x, u);
  if (e.jac.rows() != n || e.jac.cols() != n || !e.jac.allFinite())
    throw EvaluationError("eval_stack: jacobian Jx is non-finite or mis-shaped");
  e.grad0 = p.cost_gradient(t, x, u);
  if (e.grad0.size() != n || !e.grad0.allFinite())
    throw EvaluationError("eval_stack: cost gradient grad0 is non-finite or mis-shaped");
  e.hessians = p.hessians(t, x, u);
  if (e.hessians.size() != p.dim() + 1) throw EvaluationError("eval_stack: expected n + 1 hessians");
  for (std::size_t k = 0; k < e.hessians.size(); ++k) {
    const Mat& h = e.hessians[k];
    if (h.rows() != n || h.cols() != n || !h.allFinite())
      throw EvaluationError("eval_stack: hessian " + std::to_string(k) + " is non-finite or mis-shaped");
  }
  return e;
}

/// Measurable control represented by one domain index per uniform grid interval.
class PiecewiseControl {
public:
  PiecewiseControl(std::shared_ptr<const ControlDomain> domain, std::vector<std::size_t> values)
      : domain_(std::move(domain)), values_(std::move(values)) {
    if (!domain_) throw DomainError("piecewise control needs a domain");
    if (values_.empty()) throw DomainError("piecewise control needs at least one interval");
    for (std::size_t v : values_)
      if (v >= domain_->size()) throw DomainError("piecewise control value " + std::to_string(v) + " out of range");
  }

  static PiecewiseControl constant(std::shared_ptr<const ControlDomain> domain, std::size_t intervals,
                                   std::size_t index) {
    return PiecewiseControl(std::move(domain), std::vector<std::size_t>(intervals, index));
  }

  std::size_t intervals() const noexcept { return values_.size(); }
  std::size_t operator[](std::size_t k) const { return values_.at(k); }
  const std::vector<std::size_t>& values() const noexcept { return values_; }

  /// Right-continuous value at grid node j; the last interval is closed.
  std::size_t index_at_node(std::size_t node) const { return values_[std::min(node, values_.size() - 1)]; }

  const DomainPoint& point(std::size_t k) const { return domain_->point(values_.at(k)); }
  const ControlDomain& domain() const noexcept { return *domain_; }
  const std::shared_ptr<const ControlDomain>& domain_ptr() const noexcept { return domain_; }

  bool compatible_with(const PiecewiseControl& other) const {
    return domain_ == other.domain_ && values_.size() == other.values_.size();
  }

  friend bool operator==(const PiecewiseControl& a, const PiecewiseControl& b) {
    return a.domain_ == b.domain_ && a.values_ == b.values_;
  }

private:
  std::shared_ptr<const ControlDomain> domain_;
  std::vector<std::size_t> values_;
};

/// Two-point relaxed control (1 - alpha) delta_base + alpha delta_probe.
class RelaxedMixture {
public:
  RelaxedMixture(PiecewiseControl base, PiecewiseControl probe, double alpha)
      : base_(std::move(base)), probe_(std::move(probe)), alpha_(alpha) {
    if (!base_.compatible_with(probe_))
      throw DomainError("relaxed mixture: base and probe must share grid and domain");
    if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) throw DomainError("relaxed mixture: alpha must lie in [0, 1]");
  }

  const PiecewiseControl& base() const noexcept { return base_; }
  const PiecewiseControl& probe() const noexcept { return probe_; }
  double alpha() const noexcept { return alpha_; }

private:
  PiecewiseControl base_;
  PiecewiseControl probe_;
  double alpha_;
};

} // namespace socv
