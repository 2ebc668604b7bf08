#pragma once

#include "socverify/builtins.hpp"
#include "socverify/errors.hpp"
#include "socverify/families.hpp"
#include "socverify/parallel.hpp"
#include "socverify/pmp.hpp"
#include "socverify/relaxation.hpp"
#include "socverify/report.hpp"
#include "socverify/soc.hpp"
#include "socverify/trajectories.hpp"
#include "socverify/validation.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace socv {

struct RunConfig {
  std::string problem_id = "P1";
  std::size_t grid_n = 1000;
  std::size_t domain_samples = 401;
  std::optional<double> eta_pmp; // unset: the problem's default
  double eta_soc = 1e-4;
  double tol_fd = 1e-6;
  double tol_inv = 1e-8;
  double tol_growth = 1e-6;
  std::vector<double> alpha_list{0.2, 0.1, 0.05};
  std::vector<double> eps_list{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  double chatter_alpha = 0.5;
  FamilySpec family;
  double eps0 = 1.0;
  std::string output_dir = "out";
  std::optional<std::size_t> probe_index; // unset: constant at the point farthest from ubar(0)
  std::size_t fd_samples = 100;
  std::size_t audit_samples = 10000;
  bool with_convergence = false;
};

enum class Subcommand { check, pmp, soc, sufficient, chatter, quotients };

inline Subcommand parse_subcommand(const std::string& s) {
  if (s == "check") return Subcommand::check;
  if (s == "pmp") return Subcommand::pmp;
  if (s == "soc") return Subcommand::soc;
  if (s == "sufficient") return Subcommand::sufficient;
  if (s == "chatter") return Subcommand::chatter;
  if (s == "quotients") return Subcommand::quotients;
  throw ConfigError("unknown subcommand '" + s + "'");
}

namespace detail {

template <class T>
T json_get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

} // namespace detail

/// Overlay the fields present in `j` onto `c`. Unknown keys are rejected.
inline void apply_config_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "problem_id") c.problem_id = detail::json_get<std::string>(j, k);
    else if (key == "grid_n") c.grid_n = detail::json_get<std::size_t>(j, k);
    else if (key == "domain_samples") c.domain_samples = detail::json_get<std::size_t>(j, k);
    else if (key == "eta_pmp") c.eta_pmp = detail::json_get<double>(j, k);
    else if (key == "eta_soc") c.eta_soc = detail::json_get<double>(j, k);
    else if (key == "tol_fd") c.tol_fd = detail::json_get<double>(j, k);
    else if (key == "tol_inv") c.tol_inv = detail::json_get<double>(j, k);
    else if (key == "tol_growth") c.tol_growth = detail::json_get<double>(j, k);
    else if (key == "alpha_list") c.alpha_list = detail::json_get<std::vector<double>>(j, k);
    else if (key == "eps_list") c.eps_list = detail::json_get<std::vector<double>>(j, k);
    else if (key == "chatter_alpha") c.chatter_alpha = detail::json_get<double>(j, k);
    else if (key == "eps0") c.eps0 = detail::json_get<double>(j, k);
    else if (key == "output_dir") c.output_dir = detail::json_get<std::string>(j, k);
    else if (key == "probe_index") c.probe_index = detail::json_get<std::size_t>(j, k);
    else if (key == "fd_samples") c.fd_samples = detail::json_get<std::size_t>(j, k);
    else if (key == "audit_samples") c.audit_samples = detail::json_get<std::size_t>(j, k);
    else if (key == "with_convergence") c.with_convergence = detail::json_get<bool>(j, k);
    else if (key == "family") {
      if (!value.is_object()) throw ConfigError("config field 'family' must be an object");
      for (const auto& [fk, fv] : value.items()) {
        const char* f = fk.c_str();
        if (fk == "constants") c.family.constants = detail::json_get<bool>(value, f);
        else if (fk == "switches") c.family.switches = detail::json_get<std::size_t>(value, f);
        else if (fk == "random") c.family.random = detail::json_get<std::size_t>(value, f);
        else if (fk == "seed") c.family.seed = detail::json_get<std::uint64_t>(value, f);
        else if (fk == "random_blocks") c.family.random_blocks = detail::json_get<std::size_t>(value, f);
        else throw ConfigError("unknown config field 'family." + fk + "'");
      }
    } else
      throw ConfigError("unknown config field '" + key + "'");
  }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  apply_config_json(c, j);
}

inline void validate_config(const RunConfig& c) {
  if (c.grid_n < 10 || c.grid_n % 2 != 0)
    throw ConfigError("grid_n must be even and at least 10 (got " + std::to_string(c.grid_n) + ")");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  if (c.eta_pmp) positive(*c.eta_pmp, "eta_pmp");
  positive(c.eta_soc, "eta_soc");
  positive(c.tol_fd, "tol_fd");
  positive(c.tol_inv, "tol_inv");
  positive(c.tol_growth, "tol_growth");
  positive(c.eps0, "eps0");
  for (double a : c.alpha_list)
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha_list entries must lie in (0, 1]");
  for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
    if (!(c.eps_list[i] > 0.0)) throw ConfigError("eps_list entries must be positive");
    if (i && !(c.eps_list[i] < c.eps_list[i - 1])) throw ConfigError("eps_list must be strictly decreasing");
  }
  if (!(c.chatter_alpha >= 0.0 && c.chatter_alpha <= 1.0)) throw ConfigError("chatter_alpha must lie in [0, 1]");
  if (c.domain_samples < 2) throw ConfigError("domain_samples must be at least 2");
  if (c.fd_samples == 0) throw ConfigError("fd_samples must be positive");
  if (c.audit_samples < 2) throw ConfigError("audit_samples must be at least 2");
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

/// Report files of a run, relative to output_dir, in write order for the full pipeline.
inline std::vector<std::string> report_paths(const RunConfig& c) {
  const std::string d = c.problem_id + "/";
  std::vector<std::string> p{d + "integrity.json",
                             d + "pmp.json",
                             d + "series/state.csv",
                             d + "series/adjoint.csv",
                             d + "series/pmp_residual.csv",
                             d + "series/singular_set.csv",
                             d + "soc.json",
                             d + "series/second_adjoint.csv",
                             d + "series/fundamental.csv",
                             d + "series/fundamental_inverse.csv",
                             d + "series/variational_probe.csv",
                             d + "series/kernel_probe.csv",
                             d + "series/pointwise_violations.csv"};
  if (c.with_convergence)
    for (const char* f : {"chattering.json", "first_quotient.json", "second_quotient.json", "quotients.json",
                          "envelope_bounds.json"})
      p.push_back(d + "convergence/" + f);
  p.push_back(d + "verdict.json");
  p.push_back(d + "run_meta.json");
  return p;
}

/// Constant control at the domain point farthest from ubar(0); lowest index on ties.
inline std::size_t default_probe_index(const PiecewiseControl& ubar) {
  const ControlDomain& d = ubar.domain();
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i)
    if (d.distance(i, ubar[0]) > d.distance(best, ubar[0])) best = i;
  return best;
}

struct RunOutcome {
  int exit_code = 0;
  Json verdict;
  std::vector<std::string> artifacts;
};

namespace detail {

inline Json config_json(const RunConfig& c, double eta_pmp) {
  return Json{{"problem_id", c.problem_id},
              {"grid_n", c.grid_n},
              {"domain_samples", c.domain_samples},
              {"eta_pmp", eta_pmp},
              {"eta_soc", c.eta_soc},
              {"tol_fd", c.tol_fd},
              {"tol_inv", c.tol_inv},
              {"tol_growth", c.tol_growth},
              {"alpha_list", c.alpha_list},
              {"eps_list", c.eps_list},
              {"chatter_alpha", c.chatter_alpha},
              {"family",
               {{"constants", c.family.constants},
                {"switches", c.family.switches},
                {"random", c.family.random},
                {"seed", c.family.seed},
                {"random_blocks", c.family.random_blocks}}},
              {"eps0", c.eps0},
              {"probe_index", c.probe_index ? Json(*c.probe_index) : Json(nullptr)},
              {"fd_samples", c.fd_samples},
              {"audit_samples", c.audit_samples},
              {"with_convergence", c.with_convergence}};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Pipeline {
public:
  Pipeline(const RunConfig& c, Subcommand sub)
      : c_(c), sub_(sub), b_(builtin_problem(c.problem_id, c.grid_n, c.domain_samples)),
        grid_(b_.problem.horizon, c.grid_n), eta_pmp_(c.eta_pmp.value_or(b_.default_eta_pmp)),
        out_(std::filesystem::path(c.output_dir) / c.problem_id) {
    const std::size_t probe = c.probe_index.value_or(default_probe_index(b_.candidate));
    if (probe >= b_.domain->size())
      throw ConfigError("probe_index " + std::to_string(probe) + " outside the domain (size " +
                        std::to_string(b_.domain->size()) + ")");
    probe_ = PiecewiseControl::constant(b_.domain, c.grid_n, probe);
    verdict_ = Json{{"problem", c.problem_id},
                    {"name", b_.problem.name},
                    {"subcommand", name(sub)},
                    {"pmp", "skipped"},
                    {"soc_necessary", "skipped"},
                    {"pointwise", "skipped"},
                    {"sufficient", "skipped"}};
  }

  RunOutcome run() {
    int code = 0;
    std::optional<std::string> error;
    try {
      code = execute();
    } catch (const ConfigError&) {
      throw;
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      code = 3;
      error = e.what();
    }
    if (error) verdict_["error"] = *error;
    verdict_["exit_code"] = code;
    std::vector<std::string> artifacts;
    for (const auto& a : out_.written()) artifacts.push_back(c_.problem_id + "/" + a);
    artifacts.push_back(c_.problem_id + "/verdict.json");
    artifacts.push_back(c_.problem_id + "/run_meta.json");
    verdict_["artifacts"] = artifacts;
    out_.write_json("verdict.json", verdict_);
    out_.write_json("run_meta.json", Json{{"timestamp", utc_timestamp()}, {"config", config_json(c_, eta_pmp_)}});
    return {code, verdict_, artifacts};
  }

private:
  static const char* name(Subcommand s) {
    switch (s) {
    case Subcommand::check: return "check";
    case Subcommand::pmp: return "pmp";
    case Subcommand::soc: return "soc";
    case Subcommand::sufficient: return "sufficient";
    case Subcommand::chatter: return "chatter";
    case Subcommand::quotients: return "quotients";
    }
    return "?";
  }

  int execute() {
    if (sub_ == Subcommand::chatter) return run_chatter();
    const bool derivatives_ok = run_integrity();
    if (!derivatives_ok) return 3;
    const CandidateSolution cand = solve_candidate(b_.problem, b_.candidate, grid_);
    if (sub_ == Subcommand::quotients) {
      run_quotients(cand);
      return 0;
    }
    const HamiltonianTable table(cand);
    const PmpReport pmp = run_pmp(cand, table);
    if (!pmp.passed()) return 1;
    if (sub_ == Subcommand::pmp) return 0;
    const int soc = run_soc(cand, table);
    if (sub_ == Subcommand::check && c_.with_convergence) {
      run_chatter();
      run_quotients(cand);
    }
    return soc;
  }

  bool run_integrity() {
    const Problem& p = b_.problem;
    const double box = default_audit_box(p, std::nullopt);
    const auto samples = draw_samples(p, *b_.domain, c_.fd_samples, c_.family.seed, box);
    const ValidationReport v = validate_derivatives(p, *b_.domain, samples, 1e-5, c_.tol_fd);
    const RegularityReport a = audit_regularity(p, *b_.domain, c_.audit_samples, c_.family.seed);
    const MetricAxiomReport m = verify_metric_axioms(*b_.domain);
    out_.write_json("integrity.json",
                    Json{{"derivatives", to_json(v)},
                         {"regularity", to_json(a)},
                         {"metric", {{"max_triangle_excess", m.max_triangle_excess}, {"passed", m.passed()}}},
                         {"reachability_bound", reachability_bound(p)}});
    verdict_["derivatives"] = v.passed() ? "pass" : "fail";
    verdict_["regularity_violations"] = a.violations();
    if (!v.passed()) verdict_["error"] = "analytic derivatives disagree with finite differences";
    return v.passed();
  }

  PmpReport run_pmp(const CandidateSolution& cand, const HamiltonianTable& table) {
    const PmpReport r = pmp_residual(cand, table, eta_pmp_);
    set_ = singular_set(table, eta_pmp_);
    Json j = to_json(r, grid_);
    j["candidate_cost"] = cand.state.cost;
    j["probe"] = b_.domain->label(probe_[0]);
    j["probe_first_order_gap"] = first_order_gap(cand, probe_);
    j["probe_singular"] = is_singular(cand, set_, probe_).singular;
    out_.write_json("pmp.json", j);
    out_.write_series("series/state.csv", cand.state.nodes(), "x");
    out_.write_series("series/adjoint.csv", cand.psi.nodes(), "psi");
    out_.write_series("series/pmp_residual.csv", r.residual, "r");
    out_.write("series/singular_set.csv", [&](std::ostream& os) { write_singular_set_csv(os, set_); });
    verdict_["pmp"] = r.passed() ? "pass" : "fail";
    verdict_["candidate_cost"] = cand.state.cost;
    verdict_["pmp_max_residual"] = r.max_residual;
    return r;
  }

  int run_soc(const CandidateSolution& cand, const HamiltonianTable&) {
    const SocKernelContext ctx = make_kernel_context(cand, c_.tol_inv);
    const ControlFamily fam = make_family(b_.domain, c_.grid_n, c_.family);
    const bool need_all = sub_ == Subcommand::check || sub_ == Subcommand::sufficient;

    std::vector<bool> singular(fam.size());
    for (std::size_t i = 0; i < fam.size(); ++i) singular[i] = is_singular(cand, set_, fam.members[i]).singular;
    const std::vector<double> Q = parallel_map(fam.size(), [&](std::size_t i) {
      return (need_all || singular[i]) ? necessary_Q(ctx, fam.members[i]) : std::numeric_limits<double>::quiet_NaN();
    });

    const double q_probe = necessary_Q(ctx, probe_);
    const bool probe_singular = is_singular(cand, set_, probe_).singular;
    const TraceIdentity trace = trace_identity_check(ctx, probe_);
    const PointwiseReport pw = pointwise_test(ctx, set_, c_.eta_soc);

    double q_max = probe_singular ? q_probe : -std::numeric_limits<double>::infinity();
    std::string q_arg = probe_singular ? "probe" : "";
    std::size_t singular_count = 0;
    Json members = Json::array();
    for (std::size_t i = 0; i < fam.size(); ++i) {
      if (singular[i]) {
        ++singular_count;
        if (Q[i] > q_max) {
          q_max = Q[i];
          q_arg = fam.labels[i];
        }
      }
    }
    const bool any_singular = singular_count > 0 || probe_singular;
    const bool necessary_ok = !any_singular || q_max <= c_.eta_soc;

    Json soc{{"eta_soc", c_.eta_soc},
             {"Q", any_singular ? Json(q_max) : Json(nullptr)},
             {"Q_member", any_singular ? Json(q_arg) : Json(nullptr)},
             {"verdict", necessary_ok ? "pass" : "violated"},
             {"singular_members", singular_count},
             {"family_size", fam.size()},
             {"probe", {{"label", b_.domain->label(probe_[0])}, {"singular", probe_singular}, {"Q", q_probe}}},
             {"trace_identity", to_json(trace)},
             {"pointwise", to_json(pw, grid_)},
             {"integrity", {{"w_asymmetry", ctx.w_asymmetry}, {"inverse_defect", ctx.fund.inverse_defect}}}};

    verdict_["soc_necessary"] = necessary_ok ? "pass" : "violated";
    verdict_["Q"] = any_singular ? Json(q_max) : Json(nullptr);
    verdict_["pointwise"] = pw.passed() ? "pass" : "violated";
    verdict_["pointwise_violation_measure"] = pw.violation_measure;

    if (need_all) {
      const Modulus omega = effective_modulus(b_.problem, *b_.domain, c_.audit_samples, c_.family.seed);
      soc["modulus"] = omega.description;
      Json suff = sufficient_section(ctx, fam, Q, omega);
      soc["sufficient"] = suff;
      verdict_["sufficient"] = suff["status"];
      verdict_["beta_hat"] = suff["beta_hat"];
      verdict_["beta_hat_constant_family"] = suff["constant_family"]["beta_hat"];
      verdict_["growth_failures"] = suff.contains("growth") ? suff["growth"]["failures"].size() : 0;
    }

    for (std::size_t i = 0; i < fam.size(); ++i)
      members.push_back({{"label", fam.labels[i]},
                         {"kind", to_string(fam.kinds[i])},
                         {"singular", static_cast<bool>(singular[i])},
                         {"Q", number(Q[i])}});
    soc["members"] = members;

    out_.write_json("soc.json", soc);
    out_.write_series("series/second_adjoint.csv", ctx.W.nodes(), "W");
    out_.write_series("series/fundamental.csv", ctx.fund.phi.nodes(), "Phi");
    out_.write_series("series/fundamental_inverse.csv", ctx.fund.phi_inv.nodes(), "PhiInv");
    out_.write_series("series/variational_probe.csv",
                      solve_variational(b_.problem, cand.state, cand.control, probe_, grid_).nodes(), "X");
    out_.write("series/kernel_probe.csv", [&](std::ostream& os) { export_kernel_csv(os, ctx, probe_, 10); });
    out_.write("series/pointwise_violations.csv", [&](std::ostream& os) { write_pointwise_csv(os, pw, grid_); });
    return (necessary_ok && pw.passed()) ? 0 : 1;
  }

  Json sufficient_section(const SocKernelContext& ctx, const ControlFamily& fam, const std::vector<double>& Q,
                          const Modulus& omega) {
    Json s;
    std::optional<SufficientFit> fit;
    try {
      fit = sufficient_fit(ctx, fam, Q, omega);
    } catch (const DegenerateFamilyError& e) {
      return Json{{"status", "not_established"}, {"beta_hat", nullptr}, {"reason", e.what()},
                  {"constant_family", {{"beta_hat", nullptr}}}};
    }
    s = to_json(*fit, fam);
    s["scope"] = "empirical fit over the sampled family only";

    ControlFamily consts;
    std::vector<double> qc;
    for (std::size_t i = 0; i < fam.size(); ++i)
      if (fam.kinds[i] == FamilyKind::constant) {
        consts.add(fam.members[i], fam.labels[i], fam.kinds[i]);
        qc.push_back(Q[i]);
      }
    Json cj{{"beta_hat", nullptr}};
    if (consts.size() > 0) {
      try {
        cj = to_json(sufficient_fit(ctx, consts, qc, omega), consts);
      } catch (const DegenerateFamilyError& e) {
        cj = Json{{"status", "not_established"}, {"beta_hat", nullptr}, {"reason", e.what()}};
      }
    }
    s["constant_family"] = cj;

    if (fit->beta_hat) s["growth"] = to_json(growth_check(ctx, fam, *fit->beta_hat, omega, c_.eps0, c_.tol_growth), fam);
    return s;
  }

  int run_chatter() {
    const auto mix_probe = probe_;
    const Problem& p = b_.problem;
    const ChatterReport r = chattering_convergence(p, b_.candidate, mix_probe, c_.chatter_alpha, c_.eps_list, grid_);
    Json j = to_json(r);
    j["probe"] = b_.domain->label(probe_[0]);
    j["candidate_cost"] = solve_state(p, b_.candidate, grid_).cost;
    out_.write_json("convergence/chattering.json", j);
    verdict_["chattering_state_orders"] = numbers(r.state_orders);
    return 0;
  }

  void run_quotients(const CandidateSolution& cand) {
    const Problem& p = b_.problem;
    out_.write_json("convergence/first_quotient.json", to_json(first_quotient_oracle(cand, probe_, c_.alpha_list)));
    const SocKernelContext ctx = make_kernel_context(cand, c_.tol_inv);
    out_.write_json("convergence/second_quotient.json", to_json(second_quotient_oracle(ctx, probe_, c_.alpha_list)));
    out_.write_json("convergence/quotients.json",
                    to_json(quotient_convergence(p, b_.candidate, probe_, c_.alpha_list, grid_)));
    const Modulus omega = effective_modulus(p, *b_.domain, c_.audit_samples, c_.family.seed);
    std::vector<double> alphas;
    for (int i = 0; i <= 10; ++i) alphas.push_back(i / 10.0);
    out_.write_json("convergence/envelope_bounds.json", to_json(envelope_bounds(p, b_.candidate, probe_, alphas, grid_, omega)));
  }

  RunConfig c_;
  Subcommand sub_;
  BuiltinProblem b_;
  TimeGrid grid_;
  double eta_pmp_;
  ArtifactWriter out_;
  PiecewiseControl probe_ = b_.candidate;
  SingularSet set_;
  Json verdict_;
};

} // namespace detail

/// Exit codes: 0 all checks pass; 1 a necessary condition is violated; 2 configuration or
/// I/O failure; 3 internal integrity failure.
inline RunOutcome run(const RunConfig& config, Subcommand sub = Subcommand::check) {
  try {
    validate_config(config);
    detail::Pipeline pipe(config, sub);
    return pipe.run();
  } catch (const ConfigError& e) {
    return {2, Json{{"error", e.what()}, {"exit_code", 2}}, {}};
  } catch (const IoError& e) {
    return {2, Json{{"error", e.what()}, {"exit_code", 2}}, {}};
  }
}

} // namespace socv
