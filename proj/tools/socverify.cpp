#include "socverify/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

/// Flag values; set flags override the config file, which overrides the defaults.
struct Overrides {
  std::string config;
  std::optional<std::string> problem;
  std::optional<std::size_t> grid_n;
  std::optional<std::size_t> domain_samples;
  std::optional<double> eta_pmp;
  std::optional<double> eta_soc;
  std::optional<double> tol_fd;
  std::optional<double> tol_inv;
  std::optional<double> tol_growth;
  std::optional<std::vector<double>> alpha_list;
  std::optional<std::vector<double>> eps_list;
  std::optional<double> chatter_alpha;
  std::optional<bool> constants;
  std::optional<std::size_t> switches;
  std::optional<std::size_t> random;
  std::optional<std::size_t> random_blocks;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps0;
  std::optional<std::string> out;
  std::optional<std::size_t> probe_index;
  std::optional<std::size_t> fd_samples;
  std::optional<std::size_t> audit_samples;
  bool with_convergence = false;
};

void add_options(CLI::App& app, Overrides& o, bool convergence_flag) {
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--problem", o.problem, "built-in problem id (P1, P2, P3)");
  app.add_option("--grid-n", o.grid_n, "number of uniform grid intervals (even, >= 10)");
  app.add_option("--domain-samples", o.domain_samples, "domain sample count M (P3)");
  app.add_option("--eta-pmp", o.eta_pmp, "maximum-condition tolerance");
  app.add_option("--eta-soc", o.eta_soc, "second-order tolerance on Q and D");
  app.add_option("--tol-fd", o.tol_fd, "finite-difference derivative tolerance");
  app.add_option("--tol-inv", o.tol_inv, "tolerance on Phi * PhiInv - I");
  app.add_option("--tol-growth", o.tol_growth, "slack in the quadratic growth check");
  app.add_option("--alpha-list", o.alpha_list, "mixture weights for the quotient oracles")->delimiter(',');
  app.add_option("--eps-list", o.eps_list, "decreasing chattering periods")->delimiter(',');
  app.add_option("--chatter-alpha", o.chatter_alpha, "mixture weight for the chattering suite");
  app.add_option("--constants", o.constants, "include the constant controls in the family (true/false)");
  app.add_option("--switches", o.switches, "number of single-switch family members");
  app.add_option("--random", o.random, "number of seeded random family members");
  app.add_option("--random-blocks", o.random_blocks, "blocks per random family member");
  app.add_option("--seed", o.seed, "seed for the family and the sampled audits");
  app.add_option("--eps0", o.eps0, "radius of the growth neighbourhood");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--probe-index", o.probe_index, "domain index of the constant probe control");
  app.add_option("--fd-samples", o.fd_samples, "finite-difference sample count");
  app.add_option("--audit-samples", o.audit_samples, "regularity audit sample count");
  if (convergence_flag) app.add_flag("--with-convergence", o.with_convergence, "also run the relaxation suites");
}

socv::RunConfig resolve(const Overrides& o) {
  socv::RunConfig c;
  if (!o.config.empty()) socv::load_config_file(c, o.config);
  if (o.problem) c.problem_id = *o.problem;
  if (o.grid_n) c.grid_n = *o.grid_n;
  if (o.domain_samples) c.domain_samples = *o.domain_samples;
  if (o.eta_pmp) c.eta_pmp = *o.eta_pmp;
  if (o.eta_soc) c.eta_soc = *o.eta_soc;
  if (o.tol_fd) c.tol_fd = *o.tol_fd;
  if (o.tol_inv) c.tol_inv = *o.tol_inv;
  if (o.tol_growth) c.tol_growth = *o.tol_growth;
  if (o.alpha_list) c.alpha_list = *o.alpha_list;
  if (o.eps_list) c.eps_list = *o.eps_list;
  if (o.chatter_alpha) c.chatter_alpha = *o.chatter_alpha;
  if (o.constants) c.family.constants = *o.constants;
  if (o.switches) c.family.switches = *o.switches;
  if (o.random) c.family.random = *o.random;
  if (o.random_blocks) c.family.random_blocks = *o.random_blocks;
  if (o.seed) c.family.seed = *o.seed;
  if (o.eps0) c.eps0 = *o.eps0;
  if (o.out) c.output_dir = *o.out;
  if (o.probe_index) c.probe_index = *o.probe_index;
  if (o.fd_samples) c.fd_samples = *o.fd_samples;
  if (o.audit_samples) c.audit_samples = *o.audit_samples;
  if (o.with_convergence) c.with_convergence = true;
  return c;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of first- and second-order optimality conditions for sampled control problems"};
  app.require_subcommand(1);
  struct Entry {
    const char* name;
    const char* help;
    socv::Subcommand sub;
  };
  const std::vector<Entry> entries{
      {"check", "full pipeline", socv::Subcommand::check},
      {"pmp", "maximum condition only", socv::Subcommand::pmp},
      {"soc", "maximum condition and second-order necessary conditions", socv::Subcommand::soc},
      {"sufficient", "necessary conditions plus the sufficient-condition fit and growth check",
       socv::Subcommand::sufficient},
      {"chatter", "chattering convergence suite", socv::Subcommand::chatter},
      {"quotients", "difference-quotient oracles and envelope bounds", socv::Subcommand::quotients},
  };
  std::vector<Overrides> overrides(entries.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CLI::App* s = app.add_subcommand(entries[i].name, entries[i].help);
    add_options(*s, overrides[i], entries[i].sub == socv::Subcommand::check);
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    socv::RunOutcome out;
    try {
      out = socv::run(resolve(overrides[i]), entries[i].sub);
    } catch (const socv::ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
    if (out.verdict.contains("error")) std::cerr << "error: " << out.verdict["error"].get<std::string>() << '\n';
    std::cout << out.verdict.dump(2) << '\n';
    return out.exit_code;
  }
  return 2;
}
