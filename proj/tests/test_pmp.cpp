#include "support/test_problems.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using Catch::Approx;
using namespace socv;
using testsupport::constant;

namespace {

CandidateSolution candidate(const std::string& id, std::size_t n = 1000, std::size_t m = 401) {
  const auto b = builtin_problem(id, n, m);
  return solve_candidate(b.problem, b.candidate, TimeGrid(b.problem.horizon, n));
}

} // namespace

TEST_CASE("Hamiltonian values", "[pmp]") {
  const Vec zero = Vec::Zero(1), one = Vec::Constant(1, 1.0);
  for (double v : {-1.0, 0.0, 1.0}) {
    CHECK(hamiltonian(builtin_problem("P1").problem, 0.2, zero, DomainPoint{{v}}, zero) == 0.0);
    CHECK(hamiltonian(builtin_problem("P2").problem, 0.2, zero, DomainPoint{{v}}, zero) == 0.0);
  }
  const double h = hamiltonian(builtin_problem("P3").problem, 0.0, one, DomainPoint{{-1.0}}, Vec::Constant(1, -1.523188));
  CHECK(h == Approx(-0.476812).margin(1e-12));
}

TEST_CASE("maximum condition on the built-ins", "[pmp]") {
  for (const char* id : {"P1", "P2"}) {
    const CandidateSolution c = candidate(id);
    const PmpReport r = pmp_residual(c, 1e-6);
    CHECK(r.max_residual == 0.0);
    CHECK(r.passed());
  }
  const CandidateSolution c3 = candidate("P3");
  const PmpReport r3 = pmp_residual(c3, 2e-3);
  CHECK(r3.max_residual <= 1e-3);
  CHECK(r3.passed());
  for (double v : r3.residual.values()) CHECK(v >= -1e-12);
  CHECK_THROWS_AS(pmp_residual(c3, 0.0), DomainError);
}

TEST_CASE("a non-maximizing candidate fails the maximum condition", "[pmp]") {
  const auto b = builtin_problem("P3", 200, 41);
  const TimeGrid g(1.0, 200);
  const CandidateSolution c = solve_candidate(b.problem, constant(b.domain, 200, 1.0), g);
  const PmpReport r = pmp_residual(c, 2e-3);
  CHECK_FALSE(r.passed());
  CHECK(r.violation_measure == Approx(1.0).margin(1e-12));
  CHECK(r.max_residual > 0.5);
}

TEST_CASE("first-order gap", "[pmp]") {
  const CandidateSolution c1 = candidate("P1");
  const auto d = c1.control.domain_ptr();
  CHECK(first_order_gap(c1, c1.control) == 0.0);
  CHECK(first_order_gap(c1, constant(d, 1000, 1.0)) == 0.0);
  const CandidateSolution c3 = candidate("P3");
  CHECK(first_order_gap(c3, constant(c3.control.domain_ptr(), 1000, 0.0)) > 0.0);
}

TEST_CASE("passing the maximum condition implies a nonnegative gap", "[pmp][property]") {
  for (const auto& id : builtin_ids()) {
    const CandidateSolution c = candidate(id, 500, 101);
    const auto b = builtin_problem(id, 500, 101);
    REQUIRE(pmp_residual(c, b.default_eta_pmp).passed());
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto u = testsupport::random_control(c.control.domain_ptr(), 500, 1 + seed % 13, seed);
      CHECK(first_order_gap(c, u) >= -1e-9);
    }
  }
}

TEST_CASE("singular controls have a vanishing gap", "[pmp][property]") {
  for (const auto& id : builtin_ids()) {
    const auto b = builtin_problem(id, 500, 101);
    const CandidateSolution c = candidate(id, 500, 101);
    const SingularSet set = singular_set(c, b.default_eta_pmp);
    std::size_t seen = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto u = testsupport::random_control(c.control.domain_ptr(), 500, 1 + seed % 5, seed);
      if (!is_singular(c, set, u).singular) continue;
      ++seen;
      CHECK(std::abs(first_order_gap(c, u)) <= b.default_eta_pmp * b.problem.horizon + 1e-9);
    }
    CHECK(is_singular(c, set, c.control).singular);
    if (id != "P3") CHECK(seen == 60);
  }
}

TEST_CASE("singular sets", "[pmp]") {
  const CandidateSolution c1 = candidate("P1");
  const SingularSet s1 = singular_set(c1, 1e-6);
  for (const auto& m : s1.members) CHECK(m.size() == c1.control.domain().size());
  CHECK(is_singular(c1, s1, constant(c1.control.domain_ptr(), 1000, 1.0)).singular);

  const CandidateSolution c3 = candidate("P3");
  const SingularSet wide = singular_set(c3, 1e6);
  for (const auto& m : wide.members) CHECK(m.size() == 401);

  // the Hamiltonian is strictly concave in u with maximizer psi / 2
  const SingularSet tight = singular_set(c3, 1e-6);
  std::size_t singletons = 0;
  for (std::size_t k = 0; k < tight.nodes(); ++k) {
    REQUIRE_FALSE(tight.members[k].empty());
    if (tight.members[k].size() == 1) {
      ++singletons;
      CHECK(tight.members[k][0] == c3.control.domain().nearest_scalar(0.5 * c3.psi[k](0)));
    }
  }
  CHECK(singletons >= 900);

  const SingularityResult zero = is_singular(c3, singular_set(c3, 2e-3), constant(c3.control.domain_ptr(), 1000, 0.0));
  CHECK_FALSE(zero.singular);
  CHECK(zero.violation_measure > 0.5);
  CHECK(zero.violation_measure < 1.0);
  CHECK_THROWS_AS(singular_set(c3, -1.0), DomainError);
}

TEST_CASE("singular set always contains the argmax", "[pmp][property]") {
  for (const auto& id : builtin_ids()) {
    const CandidateSolution c = candidate(id, 200, 61);
    const HamiltonianTable t(c);
    for (double eta : {1e-9, 1e-4, 1e-1}) {
      const SingularSet s = singular_set(t, eta);
      for (std::size_t k = 0; k < s.nodes(); ++k) CHECK(s.contains(k, t.argmax(k)));
    }
  }
}

TEST_CASE("argmax ties resolve to the lowest index", "[pmp]") {
  const CandidateSolution c = candidate("P1", 20);
  const HamiltonianTable t(c);
  for (std::size_t k = 0; k < t.nodes(); ++k) CHECK(t.argmax(k) == 0);
}

TEST_CASE("first difference quotient", "[pmp]") {
  const CandidateSolution c1 = candidate("P1");
  const auto one = constant(c1.control.domain_ptr(), 1000, 1.0);
  const OracleReport r1 = first_quotient_oracle(c1, one, {0.2, 0.1, 0.05});
  CHECK(r1.target == 0.0);
  for (const auto& e : r1.entries) CHECK(e.quotient == Approx(-e.alpha / 3.0).margin(1e-12));
  for (double o : r1.orders) CHECK(o == Approx(1.0).margin(1e-6));

  CHECK(first_quotient_oracle(c1, c1.control, {0.5, 0.1}).entries[1].quotient == 0.0);

  const CandidateSolution c3 = candidate("P3");
  const OracleReport r3 = first_quotient_oracle(c3, constant(c3.control.domain_ptr(), 1000, 0.0), {0.2, 0.1, 0.05});
  for (double ratio : r3.ratios) {
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }
  CHECK_THROWS_AS(first_quotient_oracle(c3, c3.control, {0.0}), DomainError);
}

TEST_CASE("first quotient error shrinks with alpha", "[pmp][property]") {
  const std::vector<double> alphas{0.2, 0.1, 0.05, 0.025, 0.0125};
  for (const auto& id : builtin_ids()) {
    const CandidateSolution c = candidate(id, 1000, 401);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto u = testsupport::random_control(c.control.domain_ptr(), 1000, 4, seed + 100);
      const OracleReport r = first_quotient_oracle(c, u, alphas);
      for (std::size_t i = 1; i < r.entries.size(); ++i) CHECK(r.entries[i].error < r.entries[i - 1].error);
    }
  }
}
