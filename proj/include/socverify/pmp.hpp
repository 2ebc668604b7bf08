#pragma once

#include "socverify/errors.hpp"
#include "socverify/grid.hpp"
#include "socverify/problem.hpp"
#include "socverify/quadrature.hpp"
#include "socverify/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace socv {

/// H(t, x, u, psi) = <f, psi> - f0.
inline double hamiltonian(const Problem& p, double t, const Vec& x, const DomainPoint& u, const Vec& psi) {
  return p.dynamics(t, x, u).dot(psi) - p.running_cost(t, x, u);
}

/// H(t_k, xbar(t_k), v, psibar(t_k)) for every node k and domain index v.
class HamiltonianTable {
public:
  explicit HamiltonianTable(const CandidateSolution& c) : nodes_(c.grid.nodes()), m_(c.control.domain().size()) {
    values_.resize(nodes_ * m_);
    const ControlDomain& d = c.control.domain();
    for (std::size_t k = 0; k < nodes_; ++k) {
      const double t = c.grid.node(k);
      for (std::size_t v = 0; v < m_; ++v)
        values_[k * m_ + v] = hamiltonian(c.problem, t, c.state.x[k], d.point(v), c.psi[k]);
    }
  }

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t domain_size() const noexcept { return m_; }
  double operator()(std::size_t k, std::size_t v) const { return values_[k * m_ + v]; }

  /// Maximizing index at node k, lowest index on ties.
  std::size_t argmax(std::size_t k) const {
    std::size_t best = 0;
    for (std::size_t v = 1; v < m_; ++v)
      if ((*this)(k, v) > (*this)(k, best)) best = v;
    return best;
  }

  double max_abs(std::size_t k) const {
    double a = 0.0;
    for (std::size_t v = 0; v < m_; ++v) a = std::max(a, std::abs((*this)(k, v)));
    return a;
  }

private:
  std::size_t nodes_;
  std::size_t m_;
  std::vector<double> values_;
};

struct PmpReport {
  ScalarSeries residual;          // max_v H - H(ubar)
  std::vector<std::size_t> argmax; // per node
  double max_residual = 0.0;
  std::size_t worst_node = 0;
  double violation_measure = 0.0; // node measure where residual > eta
  double eta = 0.0;

  bool passed() const { return violation_measure == 0.0; }
};

inline PmpReport pmp_residual(const CandidateSolution& c, const HamiltonianTable& table, double eta) {
  if (!(eta > 0.0)) throw DomainError("pmp_residual: tolerance must be positive");
  std::vector<double> r(c.grid.nodes());
  PmpReport rep{ScalarSeries(c.grid, 0.0), std::vector<std::size_t>(c.grid.nodes()), 0.0, 0, 0.0, eta};
  for (std::size_t k = 0; k < c.grid.nodes(); ++k) {
    const std::size_t best = table.argmax(k);
    rep.argmax[k] = best;
    r[k] = std::max(table(k, best) - table(k, c.control.index_at_node(k)), -1e-12);
    if (r[k] > rep.max_residual) {
      rep.max_residual = r[k];
      rep.worst_node = k;
    }
    if (r[k] > eta) rep.violation_measure += c.grid.node_weight(k);
  }
  rep.residual = ScalarSeries(c.grid, std::move(r));
  return rep;
}

inline PmpReport pmp_residual(const CandidateSolution& c, double eta) {
  return pmp_residual(c, HamiltonianTable(c), eta);
}

/// Per node, every domain index whose Hamiltonian is within eta * max(1, max_v |H|) of the maximum.
struct SingularSet {
  std::vector<std::vector<std::size_t>> members;
  double eta = 0.0;

  bool contains(std::size_t node, std::size_t v) const {
    const auto& m = members.at(node);
    return std::binary_search(m.begin(), m.end(), v);
  }
  std::size_t nodes() const noexcept { return members.size(); }
};

inline SingularSet singular_set(const HamiltonianTable& table, double eta) {
  if (!(eta > 0.0)) throw DomainError("singular_set: tolerance must be positive");
  SingularSet s{std::vector<std::vector<std::size_t>>(table.nodes()), eta};
  for (std::size_t k = 0; k < table.nodes(); ++k) {
    const double top = table(k, table.argmax(k));
    const double tol = eta * std::max(1.0, table.max_abs(k));
    for (std::size_t v = 0; v < table.domain_size(); ++v)
      if (table(k, v) >= top - tol) s.members[k].push_back(v);
  }
  return s;
}

inline SingularSet singular_set(const CandidateSolution& c, double eta) { return singular_set(HamiltonianTable(c), eta); }

struct SingularityResult {
  bool singular = false;
  double violation_measure = 0.0; // node measure where u leaves the singular set
};

/// u is singular when it stays in the singular set on all nodes but a set of measure <= eta_meas.
inline SingularityResult is_singular(const CandidateSolution& c, const SingularSet& set, const PiecewiseControl& u,
                                     double eta_meas = 0.0) {
  detail::require_pair(c.control, u);
  if (set.nodes() != c.grid.nodes()) throw DomainError("is_singular: singular set lives on a different grid");
  double weight = 0.0;
  for (std::size_t k = 0; k < set.nodes(); ++k)
    if (!set.contains(k, u.index_at_node(k))) weight += c.grid.node_weight(k);
  return {weight <= eta_meas, weight};
}

/// G1(u) = int_0^T [H(ubar) - H(u)] dt along (xbar, psibar).
inline double first_order_gap(const CandidateSolution& c, const PiecewiseControl& u) {
  detail::require_pair(c.control, u);
  const Problem& p = c.problem;
  return quad_piecewise(c.grid, [&](const Stage& s) {
    const Vec& x = c.state.x.at(s);
    const Vec& psi = c.psi.at(s);
    return hamiltonian(p, s.t, x, c.control.point(s.interval), psi) - hamiltonian(p, s.t, x, u.point(s.interval), psi);
  });
}

struct OracleEntry {
  double alpha = 0.0;
  double quotient = 0.0;
  double error = 0.0; // |quotient - target|
};

struct OracleReport {
  double target = 0.0;
  std::vector<OracleEntry> entries;
  std::vector<double> ratios; // error(alpha_{i-1}) / error(alpha_i)
  std::vector<double> orders; // log(ratio) / log(alpha_{i-1} / alpha_i)
};

namespace detail {

inline void fill_rates(OracleReport& r) {
  for (std::size_t i = 1; i < r.entries.size(); ++i) {
    const auto& a = r.entries[i - 1];
    const auto& b = r.entries[i];
    const double ratio = b.error > 0.0 ? a.error / b.error : std::numeric_limits<double>::infinity();
    r.ratios.push_back(ratio);
    r.orders.push_back(std::log(ratio) / std::log(a.alpha / b.alpha));
  }
}

inline double mixture_quotient(const CandidateSolution& c, const PiecewiseControl& u, double alpha, int power) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("difference quotient needs alpha in (0, 1]");
  const double j = solve_state(c.problem, RelaxedMixture(c.control, u, alpha), c.grid).cost;
  return (j - c.state.cost) / std::pow(alpha, power);
}

} // namespace detail

/// q(alpha) = (J(mixture) - J(ubar)) / alpha against the limit G1(u).
inline OracleReport first_quotient_oracle(const CandidateSolution& c, const PiecewiseControl& u,
                                          const std::vector<double>& alphas) {
  OracleReport r;
  r.target = first_order_gap(c, u);
  for (double a : alphas) {
    const double q = detail::mixture_quotient(c, u, a, 1);
    r.entries.push_back({a, q, std::abs(q - r.target)});
  }
  detail::fill_rates(r);
  return r;
}

} // namespace socv
