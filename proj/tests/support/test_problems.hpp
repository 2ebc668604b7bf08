#pragma once

#include "socverify.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace testsupport {

using socv::DomainPoint;
using socv::Mat;
using socv::Vec;

inline std::shared_ptr<const socv::ControlDomain> small_domain() {
  static const auto d =
      std::make_shared<const socv::ControlDomain>(socv::ControlDomain::real_line({-1.0, -0.5, 0.0, 0.5, 1.0}));
  return d;
}

/// Forced pendulum x1' = x2, x2' = -sin x1 + u (1 + x1), f0 = (x1^2 + x2^2)/2 + 0.1 u x2^2 + u^2/2.
inline socv::Problem pendulum() {
  socv::Problem p;
  p.id = "pendulum";
  p.name = "forced-pendulum";
  p.horizon = 1.0;
  p.x0 = Vec(2);
  p.x0 << 0.5, 0.0;
  p.dynamics = [](double, const Vec& x, const DomainPoint& u) {
    Vec f(2);
    f << x(1), -std::sin(x(0)) + u.scalar() * (1.0 + x(0));
    return f;
  };
  p.running_cost = [](double, const Vec& x, const DomainPoint& u) {
    const double v = u.scalar();
    return 0.5 * x(0) * x(0) + 0.5 * x(1) * x(1) + 0.1 * v * x(1) * x(1) + 0.5 * v * v;
  };
  p.jacobian = [](double, const Vec& x, const DomainPoint& u) {
    Mat j(2, 2);
    j << 0.0, 1.0, -std::cos(x(0)) + u.scalar(), 0.0;
    return j;
  };
  p.cost_gradient = [](double, const Vec& x, const DomainPoint& u) {
    Vec g(2);
    g << x(0), x(1) * (1.0 + 0.2 * u.scalar());
    return g;
  };
  p.hessians = [](double, const Vec& x, const DomainPoint& u) {
    Mat h0 = Mat::Zero(2, 2), h1 = Mat::Zero(2, 2), h2 = Mat::Zero(2, 2);
    h0(0, 0) = 1.0;
    h0(1, 1) = 1.0 + 0.2 * u.scalar();
    h2(0, 0) = std::sin(x(0));
    return std::vector<Mat>{h0, h1, h2};
  };
  p.lipschitz = 10.0;
  p.modulus = socv::Modulus::linear(10.0);
  p.audit_box = 2.0;
  return p;
}

/// x' = x^2 + u, f0 = x^2, x0 = 0.2; along u = 0 the state is 0.2 / (1 - 0.2 t).
inline socv::Problem riccati_scalar() {
  socv::Problem p;
  p.id = "riccati";
  p.name = "scalar-riccati";
  p.horizon = 1.0;
  p.x0 = Vec::Constant(1, 0.2);
  p.dynamics = [](double, const Vec& x, const DomainPoint& u) { return Vec::Constant(1, x(0) * x(0) + u.scalar()); };
  p.running_cost = [](double, const Vec& x, const DomainPoint&) { return x(0) * x(0); };
  p.jacobian = [](double, const Vec& x, const DomainPoint&) { return Mat::Constant(1, 1, 2.0 * x(0)); };
  p.cost_gradient = [](double, const Vec& x, const DomainPoint&) { return Vec::Constant(1, 2.0 * x(0)); };
  p.hessians = [](double, const Vec&, const DomainPoint&) {
    return std::vector<Mat>{Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 2.0)};
  };
  p.lipschitz = 10.0;
  p.modulus = socv::Modulus::linear(1.0);
  p.audit_box = 1.0;
  return p;
}

/// Seeded piecewise-constant control with `blocks` equal blocks.
inline socv::PiecewiseControl random_control(const std::shared_ptr<const socv::ControlDomain>& d,
                                             std::size_t intervals, std::size_t blocks, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d->size() - 1);
  std::vector<std::size_t> v(intervals);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t value = pick(rng);
    for (std::size_t k = b * intervals / blocks; k < (b + 1) * intervals / blocks; ++k) v[k] = value;
  }
  return socv::PiecewiseControl(d, std::move(v));
}

inline socv::PiecewiseControl constant(const std::shared_ptr<const socv::ControlDomain>& d, std::size_t intervals,
                                       double value) {
  return socv::PiecewiseControl::constant(d, intervals, d->nearest_scalar(value));
}

} // namespace testsupport
