#pragma once

#include "socverify/errors.hpp"
#include "socverify/families.hpp"
#include "socverify/grid.hpp"
#include "socverify/pmp.hpp"
#include "socverify/relaxation.hpp"
#include "socverify/soc.hpp"
#include "socverify/validation.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace socv {

using Json = nlohmann::ordered_json;

namespace detail {

/// Non-finite values serialize as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

} // namespace detail

inline Json to_json(const ValidationReport& r) {
  return Json{{"samples", r.sample_count},
              {"tol", r.tol},
              {"max_jacobian_error", detail::number(r.max_jacobian_error)},
              {"max_gradient_error", detail::number(r.max_gradient_error)},
              {"max_hessian_error", detail::number(r.max_hessian_error)},
              {"flagged_samples", r.flagged},
              {"passed", r.passed()}};
}

inline Json to_json(const RegularityReport& r) {
  return Json{{"box", r.box},
              {"samples", r.sample_count},
              {"modulus", r.modulus_description},
              {"empirical_lipschitz", detail::number(r.empirical_lipschitz())},
              {"state_lipschitz", detail::number(r.state_lipschitz)},
              {"origin_bound", detail::number(r.origin_bound)},
              {"jacobian_lipschitz", detail::number(r.jacobian_lipschitz)},
              {"omega_constant", detail::number(r.omega_constant)},
              {"violations",
               {{"lipschitz", r.lipschitz_violations},
                {"origin", r.origin_violations},
                {"jacobian", r.jacobian_violations},
                {"omega", r.omega_violations},
                {"hessian", r.hessian_violations}}},
              {"passed", r.passed()}};
}

inline Json to_json(const PmpReport& r, const TimeGrid& g) {
  return Json{{"eta_pmp", r.eta},
              {"max_residual", detail::number(r.max_residual)},
              {"worst_node", r.worst_node},
              {"worst_t", g.node(r.worst_node)},
              {"violation_measure", r.violation_measure},
              {"passed", r.passed()}};
}

inline Json to_json(const OracleReport& r) {
  Json e = Json::array();
  for (const auto& x : r.entries)
    e.push_back({{"alpha", x.alpha}, {"quotient", detail::number(x.quotient)}, {"error", detail::number(x.error)}});
  return Json{{"target", detail::number(r.target)},
              {"entries", e},
              {"ratios", detail::numbers(r.ratios)},
              {"orders", detail::numbers(r.orders)}};
}

inline Json to_json(const ChatterReport& r) {
  Json e = Json::array();
  for (const auto& x : r.entries)
    e.push_back({{"epsilon", x.epsilon},
                 {"state_error", detail::number(x.state_error)},
                 {"cost_error", detail::number(x.cost_error)},
                 {"cost", detail::number(x.cost)}});
  return Json{{"alpha", r.alpha},
              {"mixture_cost", detail::number(r.mixture_cost)},
              {"entries", e},
              {"state_orders", detail::numbers(r.state_orders)},
              {"cost_orders", detail::numbers(r.cost_orders)}};
}

inline Json to_json(const QuotientReport& r) {
  Json e = Json::array();
  for (const auto& x : r.entries)
    e.push_back({{"alpha", x.alpha}, {"x_error", detail::number(x.x_error)}, {"y_error", detail::number(x.y_error)}});
  return Json{{"entries", e}, {"x_orders", detail::numbers(r.x_orders)}, {"y_orders", detail::numbers(r.y_orders)}};
}

inline Json to_json(const BoundReport& r) {
  Json e = Json::array();
  for (const auto& x : r.entries)
    e.push_back({{"alpha", x.alpha}, {"c1", detail::number(x.c1)}, {"c2", detail::number(x.c2)}});
  return Json{{"entries", e},
              {"c1_spread", detail::number(r.c1_spread)},
              {"c2_spread", detail::number(r.c2_spread)},
              {"max_spread", r.max_spread},
              {"passed", r.passed()}};
}

inline Json to_json(const PointwiseReport& r, const TimeGrid& g) {
  return Json{{"eta_soc", r.eta},
              {"violation_count", r.violations.size()},
              {"violation_measure", r.violation_measure},
              {"max_value", detail::number(r.max_value)},
              {"first_violation_t", r.violations.empty() ? Json(nullptr) : Json(g.node(r.violations.front().node))},
              {"passed", r.passed()}};
}

inline Json to_json(const TraceIdentity& r) {
  return Json{{"lhs", detail::number(r.lhs)}, {"rhs", detail::number(r.rhs)}, {"gap", detail::number(r.gap)}};
}

inline Json to_json(const SufficientFit& f, const ControlFamily& fam) {
  return Json{{"status", f.established() ? "beta_hat" : "not_established"},
              {"beta_hat", f.beta_hat ? Json(*f.beta_hat) : Json(nullptr)},
              {"min_ratio", detail::number(f.min_ratio)},
              {"argmin", fam.labels.at(f.argmin)},
              {"members_fitted", fam.size()}};
}

inline Json to_json(const GrowthReport& r, const ControlFamily& fam) {
  Json fails = Json::array();
  for (const auto& f : r.failures)
    fails.push_back({{"member", fam.labels.at(f.index)}, {"delta_j", f.delta_j}, {"bound", f.bound}});
  return Json{{"beta", r.beta},
              {"eps0", r.eps0},
              {"checked", r.checked},
              {"outside_neighborhood", r.outside},
              {"min_margin", detail::number(r.min_margin)},
              {"failures", fails},
              {"passed", r.passed()}};
}

/// One row per node: node index, then the member indices.
inline void write_singular_set_csv(std::ostream& os, const SingularSet& s) {
  os << "node,members\n";
  for (std::size_t k = 0; k < s.nodes(); ++k) {
    os << k << ',';
    for (std::size_t i = 0; i < s.members[k].size(); ++i) os << (i ? " " : "") << s.members[k][i];
    os << '\n';
  }
}

inline void write_pointwise_csv(std::ostream& os, const PointwiseReport& r, const TimeGrid& g) {
  os << "node,t,v,D\n";
  for (const auto& v : r.violations)
    os << v.node << ',' << detail::format_double(g.node(v.node)) << ',' << v.v << ',' << detail::format_double(v.value)
       << '\n';
}

/// Collects files below one root directory; paths are recorded relative to the root.
class ArtifactWriter {
public:
  explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }
  const std::vector<std::string>& written() const noexcept { return written_; }

  template <class Fill>
  void write(const std::string& relative, Fill&& fill) {
    const std::filesystem::path full = root_ / relative;
    std::error_code ec;
    std::filesystem::create_directories(full.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + full.parent_path().string() + ": " + ec.message());
    std::ofstream os(full, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + full.string() + " for writing");
    fill(os);
    os.flush();
    if (!os) throw IoError("failed writing " + full.string());
    written_.push_back(relative);
  }

  void write_json(const std::string& relative, const Json& j) {
    write(relative, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }

  template <class T>
  void write_series(const std::string& relative, const GridFunction<T>& s, const std::string& name) {
    write(relative, [&](std::ostream& os) { write_csv(os, s, name); });
  }

private:
  std::filesystem::path root_;
  std::vector<std::string> written_;
};

} // namespace socv
