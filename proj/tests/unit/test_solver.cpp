#include <doctest.h>

#include <random>

#include "homoclinic/action.hpp"
#include "homoclinic/errors.hpp"
#include "homoclinic/solver.hpp"
#include "support.hpp"

using namespace homoclinic;
using namespace testing_support;

namespace {

void check_nonincreasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] <= values[i - 1]);
}

}  // namespace

TEST_CASE("initial guess lies in E and clears q") {
  const Potential pot = example_potential();
  const Grid g = default_grid();
  const GridFunction u = initial_guess_bump(g, pot, 1.5, 0.0, 2.0);
  const int j = g.zero_index();
  CHECK(u(j, 0) == 3.0);
  CHECK(u(j, 1) == 0.0);
  CHECK(u(0, 0) == 0.0);
  CHECK(u(g.size() - 1, 1) == 0.0);
  CHECK(singularity_clearance(u, pot) >= default_clearance(pot));
  const double a = action_value(u, pot);
  CHECK(std::isfinite(a));
  CHECK(a > 0.0);
  CHECK_THROWS_AS(initial_guess_bump(g, pot, 1.0, 0.0, 2.0), PreconditionViolation);
  CHECK_THROWS_AS(initial_guess_bump(g, pot, 1.5, 0.01, 2.0), PreconditionViolation);

  GuessShape mirrored;
  mirrored.orientation = -1;
  const GridFunction w = initial_guess_bump(g, pot, 1.5, 0.0, 2.0, mirrored);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(w(i, 0) == u(i, 0));
    CHECK(w(i, 1) == -u(i, 1));
  }
}

TEST_CASE("minimization over E") {
  const Potential pot = example_potential();
  const Grid g = default_grid();
  SolverConfig cfg;
  const int j = coefficient_peak_node(g, pot);
  CHECK(j == g.zero_index());
  const GridFunction u0 = initial_guess_bump(g, pot, cfg.k0, g.time(j), cfg.bump_width);
  const EStageResult r = minimize_over_E(u0, {j, 1.0 + cfg.eps_k, cfg.k0}, pot, cfg);

  CHECK(r.converged);
  CHECK(r.value > 0.0);
  CHECK(r.grad_norm <= cfg.grad_tol);
  CHECK(r.k >= 1.0 + cfg.eps_k);
  CHECK(r.u(j, 0) == r.k * 2.0);
  CHECK(r.u(j, 1) == 0.0);
  CHECK(r.value <= action_value(u0, pot));
  check_nonincreasing(r.values);
  CHECK(singularity_clearance(r.u, pot) >= default_clearance(pot));
  // Either k stayed clear of its clamp or the run says so.
  CHECK((r.k > 1.0 + cfg.eps_k / 2.0 || r.constraint_active));

  SUBCASE("restarting from the minimizer takes no steps") {
    const EStageResult again = minimize_over_E(r.u, {j, 1.0 + cfg.eps_k, r.k}, pot, cfg);
    CHECK(again.iterations == 0);
    CHECK(again.value == doctest::Approx(r.value).epsilon(1e-13));
  }
  SUBCASE("raw gradient path meets the same contract") {
    SolverConfig raw = cfg;
    raw.precondition = false;
    const EStageResult s = minimize_over_E(u0, {j, 1.0 + cfg.eps_k, cfg.k0}, pot, raw);
    CHECK(s.converged);
    check_nonincreasing(s.values);
    CHECK(s.value == doctest::Approx(r.value).epsilon(1e-8));
  }
  SUBCASE("starting point outside E is refused") {
    CHECK_THROWS_AS(minimize_over_E(GridFunction(g, 2), {j, 1.1, 1.5}, pot, cfg),
                    PreconditionViolation);
  }
}

TEST_CASE("descent from a tiny perturbation of zero collapses") {
  const Potential pot = example_potential();
  const Grid g = default_grid();
  const GridFunction u = random_smooth_trajectory(g, 2, 1e-3, 3);
  CHECK_THROWS_AS(descend_to_critical(u, pot, SolverConfig{}), ConvergedToZero);
}

TEST_CASE("descent and the full pipeline") {
  const Potential pot = example_potential();
  const Grid g = default_grid();
  SolverConfig cfg;
  const HomoclinicCandidate c = solve_homoclinic(pot, g, cfg);

  CHECK(c.grad_norm <= cfg.grad_tol);
  CHECK(c.action > 0.0);
  CHECK(c.clearance >= default_clearance(pot));
  CHECK(c.residual.tail_sup_u <= 1e-3);
  CHECK(c.normalized);
  CHECK(renormalize_translation(c.trajectory).shift == 0);
  check_nonincreasing(c.action_history);
  REQUIRE(c.e_value.has_value());
  CHECK(*c.e_value > 0.0);
  CHECK(c.action <= *c.e_value + 1e-12 * std::abs(*c.e_value));
  for (const RenormalizationEvent& e : c.renormalizations) {
    if (e.applied) {
      CHECK(std::abs(e.action_after - e.action_before) <= 1e-10 * std::abs(e.action_before));
    }
  }
  const auto cross = find_crossing(c.trajectory, pot);
  REQUIRE(cross.has_value());
  CHECK(cross->k > 1.0);

  SUBCASE("deterministic") {
    const HomoclinicCandidate d = solve_homoclinic(pot, g, cfg);
    CHECK(d.trajectory.values() == c.trajectory.values());
    CHECK(d.action == c.action);
    CHECK(d.iterations == c.iterations);
  }
  SUBCASE("critical point sits above the sampled positivity gap") {
    const PositivityProbe p = probe_positivity_gap(pot, g, 1.0, 200);
    CHECK(p.min_action > 0.0);
    CHECK(c.action >= p.min_action);
  }
  SUBCASE("descent never raises the action") {
    GridFunction start = initial_guess_bump(g, pot, 2.0, 0.0, 1.0);
    const HomoclinicCandidate d = descend_to_critical(start, pot, cfg);
    CHECK(d.action <= action_value(start, pot));
    check_nonincreasing(d.action_history);
    CHECK(d.grad_norm <= cfg.grad_tol);
  }
  SUBCASE("raw gradient descent reaches the same critical point") {
    SolverConfig raw = cfg;
    raw.precondition = false;
    const HomoclinicCandidate d = solve_homoclinic(pot, g, raw);
    CHECK(d.grad_norm <= cfg.grad_tol);
    CHECK(d.action == doctest::Approx(c.action).epsilon(1e-8));
  }
}

TEST_CASE("pipeline gates and failure modes") {
  const Grid g = default_grid();
  SUBCASE("coefficient changing sign is rejected before optimizing") {
    const Potential bad = example_potential(2.0, 1.0, 2.0);
    CHECK_THROWS_AS(solve_homoclinic(bad, g, SolverConfig{}), HypothesisViolation);
  }
  SUBCASE("unreachable tolerance exhausts the budget") {
    SolverConfig cfg;
    cfg.grad_tol = 0.0;
    cfg.max_iters = 200;
    cfg.max_restarts = 1;
    CHECK_THROWS_AS(solve_homoclinic(example_potential(), g, cfg), NoSolutionFound);
  }
}

TEST_CASE("crossing detection") {
  const Potential pot = example_potential();
  const Grid g = default_grid();
  CHECK_FALSE(find_crossing(GridFunction(g, 2), pot).has_value());
  GridFunction u(g, 2);
  u(100, 0) = 3.0;
  const auto c = find_crossing(u, pot);
  REQUIRE(c.has_value());
  CHECK(c->node == 100);
  CHECK(c->k == doctest::Approx(1.5));
}
