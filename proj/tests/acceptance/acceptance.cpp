// Runs the twelve acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: acceptance [output_dir]
#include "support/test_problems.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace socv;
using testsupport::constant;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED(" << what << ")";
    }
  }
  template <class T>
  Outcome& note(const std::string& key, const T& v) {
    detail << ' ' << key << '=' << v;
    return *this;
  }
};

using Criterion = std::function<void(Outcome&)>;

SocKernelContext context(const std::string& id, std::size_t n, std::size_t m = 401) {
  const auto b = builtin_problem(id, n, m);
  // tolerances are checked explicitly where a criterion needs them
  return make_kernel_context(solve_candidate(b.problem, b.candidate, TimeGrid(b.problem.horizon, n)), 1.0, 1.0);
}

PiecewiseControl default_probe(const BuiltinProblem& b, std::size_t n) {
  return PiecewiseControl::constant(b.domain, n, default_probe_index(b.candidate));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void ac01(Outcome& o, const fs::path& out) {
  const SocKernelContext c = context("P1", 1000);
  const double q = necessary_Q(c, constant(c.ubar().domain_ptr(), 1000, 1.0));
  o.note("Q", q).expect(std::abs(q - 1.0 / 3.0) <= 1e-3, "Q = 1/3");

  RunConfig cfg;
  cfg.problem_id = "P1";
  cfg.output_dir = (out / "ac01").string();
  const RunOutcome r = run(cfg);
  o.note("verdict", r.verdict.value("soc_necessary", "?")).note("exit", r.exit_code);
  o.expect(r.verdict.value("soc_necessary", "") == "violated", "verdict violated");

  const auto b = builtin_problem("P1", 1000);
  const PointwiseReport pw = pointwise_test(c, singular_set(c.cand, b.default_eta_pmp), 1e-4);
  o.note("pointwise_measure", pw.violation_measure);
  o.expect(pw.violation_measure >= 0.9 * b.problem.horizon, "pointwise measure");
}

void ac02(Outcome& o) {
  const auto b = builtin_problem("P2", 1000);
  const SocKernelContext c = context("P2", 1000);
  const double q = necessary_Q(c, constant(b.domain, 1000, 1.0));
  o.note("Q", q).expect(std::abs(q + 1.0 / 3.0) <= 1e-3, "Q = -1/3");

  const SingularSet set = singular_set(c.cand, b.default_eta_pmp);
  double q_max = -INFINITY;
  std::size_t singular = 0;
  for (std::uint64_t seed = 0; singular < 100 && seed < 1000; ++seed) {
    const auto u = testsupport::random_control(b.domain, 1000, 1 + seed % 16, 2024 + seed);
    if (!is_singular(c.cand, set, u).singular) continue;
    ++singular;
    q_max = std::max(q_max, necessary_Q(c, u));
  }
  o.note("singular_controls", singular).note("max_Q", q_max);
  o.expect(singular == 100, "100 singular controls");
  o.expect(q_max <= 1e-4, "Q <= 1e-4");

  const PointwiseReport pw = pointwise_test(c, set, 1e-4);
  o.note("pointwise_max", pw.max_value).expect(pw.passed(), "pointwise passes");
}

void ac03(Outcome& o) {
  const SocKernelContext c1 = context("P1", 1000);
  const auto one1 = constant(c1.ubar().domain_ptr(), 1000, 1.0);
  const double q1 = necessary_Q(c1, one1);
  double worst = 0.0;
  for (const auto& e : second_quotient_oracle(c1, one1, {0.5, 0.25, 0.125}).entries)
    worst = std::max(worst, std::abs(e.quotient + q1));
  o.note("P1_max_gap", worst).expect(worst <= 2e-3, "P1 lock");

  const SocKernelContext c2 = context("P2", 1000);
  const auto one2 = constant(c2.ubar().domain_ptr(), 1000, 1.0);
  const double q2 = necessary_Q(c2, one2);
  const double gap = std::abs(second_quotient_oracle(c2, one2, {0.05}).entries[0].quotient + q2);
  o.note("P2_gap", gap).expect(gap <= 5e-3, "P2 lock");
}

void ac04(Outcome& o) {
  const SocKernelContext c = context("P3", 1000);
  const OracleReport r = first_quotient_oracle(c.cand, constant(c.ubar().domain_ptr(), 1000, 0.0), {0.2, 0.1, 0.05});
  for (double ratio : r.ratios) {
    o.note("ratio", ratio);
    o.expect(ratio >= 1.6 && ratio <= 2.4, "ratio in [1.6, 2.4]");
  }
  o.expect(r.ratios.size() == 2, "two ratios");
}

void ac05(Outcome& o) {
  const SocKernelContext c1 = context("P1", 1000);
  const TraceIdentity t1 = trace_identity_check(c1, constant(c1.ubar().domain_ptr(), 1000, 1.0), INFINITY);
  o.note("P1_lhs", t1.lhs).note("P1_rhs", t1.rhs).note("P1_gap", t1.gap);
  o.expect(t1.gap <= 1e-5, "P1 gap");
  o.expect(std::abs(t1.lhs + 1.0 / 3.0) <= 1e-5 && std::abs(t1.rhs + 1.0 / 3.0) <= 1e-5, "P1 sides = -1/3");

  const SocKernelContext c3 = context("P3", 2000);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto u = testsupport::random_control(c3.ubar().domain_ptr(), 2000, 1 + seed % 16, 500 + seed);
    worst = std::max(worst, trace_identity_check(c3, u, INFINITY).gap);
  }
  o.note("P3_max_gap", worst).expect(worst <= 1e-5, "P3 gap");
}

void ac06(Outcome& o) {
  const TimeGrid g(1.0, 2000);
  for (const auto& id : builtin_ids()) {
    const auto b = builtin_problem(id, 2000);
    const CandidateSolution c = solve_candidate(b.problem, b.candidate, g);
    const Fundamental f = solve_fundamental(b.problem, c.state, c.control, g, 1.0);
    std::vector<PiecewiseControl> probes{default_probe(b, 2000)};
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      probes.push_back(testsupport::random_control(b.domain, 2000, 1 + 3 * seed, 900 + seed));
    double worst = 0.0;
    for (const auto& u : probes) {
      const auto X = solve_variational(b.problem, c.state, c.control, u, g);
      worst = std::max(worst, sup_distance(x_via_transition(b.problem, f, c.state, c.control, u, g), X.nodes()));
    }
    o.note(id, worst).expect(worst <= 1e-6, id + " transition");
  }
}

void ac07(Outcome& o) {
  const SocKernelContext c = context("P3", 1000, 401);
  const double j = c.cand.state.cost;
  const PmpReport r = pmp_residual(c.cand, 2e-3);
  o.note("J", j).note("max_residual", r.max_residual);
  o.expect(std::abs(j - std::tanh(1.0)) <= 1e-4, "J = tanh(1)");
  o.expect(r.max_residual <= 2e-3, "residual");
}

void ac08(Outcome& o) {
  // every eps = 2^-k spans a whole number of steps at N = 1024
  const std::size_t n = 1024;
  const TimeGrid g(1.0, n);
  const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  const auto b1 = builtin_problem("P1", n);
  const ChatterReport r1 = chattering_convergence(b1.problem, b1.candidate, constant(b1.domain, n, 1.0), 0.5, eps, g);
  for (std::size_t i = 0; i < r1.entries.size(); ++i)
    if (i) o.expect(r1.entries[i].state_error < r1.entries[i - 1].state_error, "state error decreases");
  for (double ord : r1.state_orders) {
    o.note("order", ord);
    o.expect(ord >= 0.7 && ord <= 1.3, "order in [0.7, 1.3]");
  }

  const auto b2 = builtin_problem("P2", n);
  const double j_bar = solve_state(b2.problem, b2.candidate, g).cost;
  std::vector<PiecewiseControl> probes{constant(b2.domain, n, 1.0), constant(b2.domain, n, -1.0)};
  for (std::uint64_t seed = 0; seed < 4; ++seed) probes.push_back(testsupport::random_control(b2.domain, n, 8, seed));
  double margin = INFINITY;
  for (const auto& u : probes)
    for (const auto& e : chattering_convergence(b2.problem, b2.candidate, u, 0.5, eps, g).entries)
      margin = std::min(margin, e.cost - j_bar);
  o.note("P2_min_cost_margin", margin).expect(margin >= -1e-9, "P2 chattering cost");
}

void ac09(Outcome& o) {
  std::vector<double> alphas;
  for (int i = 0; i <= 10; ++i) alphas.push_back(i / 10.0);
  const TimeGrid g(1.0, 1000);
  for (const auto& id : builtin_ids()) {
    const auto b = builtin_problem(id, 1000);
    const BoundReport r = envelope_bounds(b.problem, b.candidate, default_probe(b, 1000), alphas, g, *b.problem.modulus);
    o.note(id + "_c1_spread", r.c1_spread).note(id + "_c2_spread", r.c2_spread);
    o.expect(std::isfinite(r.c1_spread) && std::isfinite(r.c2_spread), id + " finite");
    o.expect(r.passed(), id + " spread <= 2");
  }
}

void ac10(Outcome& o) {
  const auto b = builtin_problem("P2", 1000);
  const SocKernelContext c = context("P2", 1000);
  const ControlFamily fam = make_family(b.domain, 1000, FamilySpec{});
  o.note("family_size", fam.size()).expect(fam.size() == 75, "family size");
  const Modulus omega = effective_modulus(b.problem, *b.domain);

  const ControlFamily consts = fam.subfamily(FamilyKind::constant);
  const SufficientFit cf = sufficient_fit(c, consts, omega);
  o.note("beta_hat_constant", cf.established() ? *cf.beta_hat : NAN);
  o.expect(cf.established() && *cf.beta_hat > 0.0, "beta_hat > 0 on constants");
  if (cf.established()) {
    const GrowthReport gc = growth_check(c, consts, *cf.beta_hat, omega, 1.0);
    o.note("constant_growth_failures", gc.failures.size()).expect(gc.passed(), "growth on constants");
  }

  const SufficientFit ff = sufficient_fit(c, fam, omega);
  o.note("beta_hat_full", ff.established() ? *ff.beta_hat : NAN);
  if (ff.established()) {
    const GrowthReport gf = growth_check(c, fam, *ff.beta_hat, omega, 1.0);
    o.note("checked", gf.checked).note("failures", gf.failures.size());
    o.expect(gf.passed(), "growth on the full family");
  }
}

void ac11(Outcome& o) {
  for (const auto& id : builtin_ids()) {
    const auto b = builtin_problem(id, 1000);
    const SocKernelContext c = context(id, 1000);
    o.note(id + "_asym", c.w_asymmetry).note(id + "_inv_defect", c.fund.inverse_defect);
    o.expect(c.w_asymmetry <= 1e-10, id + " W asymmetry");
    o.expect(c.fund.inverse_defect <= 1e-8, id + " inverse defect");
    const auto samples = draw_samples(b.problem, *b.domain, 100, 0, default_audit_box(b.problem, std::nullopt));
    const ValidationReport v = validate_derivatives(b.problem, *b.domain, samples, 1e-5, 1e-6);
    o.note(id + "_fd", v.max_error()).expect(v.max_error() <= 1e-6, id + " derivatives");
  }
  auto err = [](std::size_t n) {
    const TimeGrid g(1.0, n);
    const auto y = integrate<double>([](const Stage&, double v) { return v; }, 1.0, g);
    return std::abs(y.back() - std::exp(1.0));
  };
  for (std::size_t n : {10u, 20u}) {
    const double ratio = err(n) / err(2 * n);
    o.note("rk4_ratio", ratio).expect(ratio >= 12.0 && ratio <= 20.0, "RK4 ratio");
  }
}

void ac12(Outcome& o, const fs::path& out) {
  std::vector<RunOutcome> runs;
  for (const char* tag : {"a", "b"}) {
    RunConfig cfg;
    cfg.problem_id = "P2";
    cfg.with_convergence = true;
    cfg.family.seed = 7;
    cfg.output_dir = (out / "ac12" / tag).string();
    fs::remove_all(cfg.output_dir);
    runs.push_back(run(cfg));
  }
  o.expect(runs[0].artifacts == runs[1].artifacts && !runs[0].artifacts.empty(), "same artifacts");
  std::size_t compared = 0, differing = 0;
  for (const auto& p : runs[0].artifacts) {
    if (p.find("run_meta.json") != std::string::npos) continue;
    ++compared;
    if (slurp(out / "ac12" / "a" / p) != slurp(out / "ac12" / "b" / p)) ++differing;
  }
  o.note("compared", compared).note("differing", differing).expect(differing == 0, "identical reports");
}

} // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "socverify_acceptance";
  fs::create_directories(out);

  const std::vector<std::pair<const char*, Criterion>> criteria{
      {"AC01 P1 detection", [&](Outcome& o) { ac01(o, out); }},
      {"AC02 P2 compliance", ac02},
      {"AC03 second-quotient lock", ac03},
      {"AC04 first-quotient lock", ac04},
      {"AC05 trace identity", ac05},
      {"AC06 transition representation", ac06},
      {"AC07 maximum condition on P3", ac07},
      {"AC08 chattering", ac08},
      {"AC09 envelope constants", ac09},
      {"AC10 sufficient-condition consistency", ac10},
      {"AC11 integrity suite", ac11},
      {"AC12 determinism", [&](Outcome& o) { ac12(o, out); }},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      check(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %s:%s\n", o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
