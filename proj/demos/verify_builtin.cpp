// Library walk-through on a built-in problem: candidate, maximum condition, second-order test.
#include "socverify.hpp"

#include <cstdio>
#include <string>

int main(int argc, char** argv) {
  const std::string id = argc > 1 ? argv[1] : "P1";
  const std::size_t n = 1000;
  try {
    const socv::BuiltinProblem b = socv::builtin_problem(id, n);
    const socv::TimeGrid grid(b.problem.horizon, n);
    socv::CandidateSolution cand = socv::solve_candidate(b.problem, b.candidate, grid);
    std::printf("%s (%s)\n  %s\n", id.c_str(), b.problem.name.c_str(), b.description.c_str());
    std::printf("  J(candidate)          = %.8f\n", cand.state.cost);

    const socv::PmpReport pmp = socv::pmp_residual(cand, b.default_eta_pmp);
    std::printf("  max PMP residual      = %.3e (%s)\n", pmp.max_residual, pmp.passed() ? "pass" : "fail");

    const socv::SingularSet set = socv::singular_set(cand, b.default_eta_pmp);
    const auto probe = socv::PiecewiseControl::constant(b.domain, n, socv::default_probe_index(b.candidate));
    const socv::SocKernelContext ctx = socv::make_kernel_context(std::move(cand));
    const double q = socv::necessary_Q(ctx, probe);
    const socv::PointwiseReport pw = socv::pointwise_test(ctx, set);
    std::printf("  Q(probe %s)          = %+.6f\n", b.domain->label(probe[0]).c_str(), q);
    std::printf("  pointwise violations  = %zu over measure %.4f\n", pw.violations.size(), pw.violation_measure);
  } catch (const socv::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
