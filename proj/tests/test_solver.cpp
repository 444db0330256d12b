#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "decpomdp/builtin.hpp"
#include "decpomdp/format.hpp"
#include "decpomdp/oracle.hpp"
#include "decpomdp/solver.hpp"
#include "test_support.hpp"

using namespace decpomdp;

TEST_CASE("expected_return of a constant-reward model is r/(1-gamma)") {
  auto inst = testsupport::random_instance(3, 3, 2, 2, 2, 2, 0.9);
  for (double& r : inst.model.reward) r = 5.0;
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  CHECK(expected_return(chain, inst.model, inst.policy, e.frequency) ==
        doctest::Approx(50.0).epsilon(1e-10));
}

TEST_CASE("expected_return is zero when the rewarded state is unreachable") {
  DecPomdpModel m;
  m.num_agents = 1;
  m.states = {"s0", "s1"};
  m.actions = {{"a0"}};
  m.observations = {{"o0"}};
  m.initial_state = {1.0, 0.0};
  m.transition = {1.0, 0.0, 0.0, 1.0};  // stay put
  m.observation_fn = {1.0, 1.0};
  m.reward = {0.0, 1.0};
  m.discount = 0.9;
  JointPolicy p = init_policy(m, {1}, 0, InitScheme::kUniform);
  const JointChain chain = build_joint_chain(m, p);
  const EstepResult e = bellman_solve(chain);
  CHECK(expected_return(chain, m, p, e.frequency) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("expected_return matches exhaustive enumeration up to the tail bound") {
  auto inst = testsupport::random_instance(7, 3, 2, 2, 2, 2, 0.8);
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  const double exact = expected_return(chain, inst.model, inst.policy, e.frequency);
  const int horizon = 60;
  const double truncated = oracle::enumerate_return(inst.model, inst.policy, horizon);
  double rmax = 0.0;
  for (double r : inst.model.reward) rmax = std::max(rmax, std::fabs(r));
  const double tail = std::pow(0.8, horizon + 1) * rmax / (1.0 - 0.8);
  CHECK(std::fabs(exact - truncated) <= tail + 1e-12);
}

TEST_CASE("the likelihood form of the return agrees with the frequency form") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto inst = testsupport::random_instance(seed, 3, 2, 2, 2, 2, 0.9);
    const JointChain chain = build_joint_chain(inst.model, inst.policy);
    const EstepResult e = bellman_solve(chain);
    const double a = expected_return(chain, inst.model, inst.policy, e.frequency);
    const double b = expected_return_from_value(chain, inst.model, e.value);
    CHECK(std::fabs(a - b) <= 1e-6 * (1.0 + std::fabs(a)));
  }
}

TEST_CASE("a reward-degenerate model converges at the second iteration") {
  auto inst = testsupport::random_instance(17, 3, 2, 2, 2, 2, 0.9);
  for (double& r : inst.model.reward) r = 2.0;
  SolverConfig cfg;
  cfg.algorithm = Algorithm::kBem;
  cfg.seed = 17;
  const SolveResult result = run(inst.model, cfg);
  REQUIRE(result.trace.size() == 2);
  CHECK(result.trace[0].expected_return == doctest::Approx(20.0).epsilon(1e-10));
  CHECK(result.trace[1].expected_return == doctest::Approx(20.0).epsilon(1e-10));
}

TEST_CASE("the three engines trace the same returns per iteration") {
  const DecPomdpModel model = builtin_model("toy2agent");
  const int iters = 20;
  std::vector<std::vector<IterationTrace>> traces;
  for (Algorithm algo : {Algorithm::kEm, Algorithm::kBem, Algorithm::kMbem}) {
    SolverConfig cfg;
    cfg.algorithm = algo;
    cfg.epsilon = 1e-6;
    cfg.max_iterations = iters;
    cfg.seed = 99;
    cfg.exact_return = true;
    cfg.j_tolerance = 0.0;  // run the full budget
    cfg.policy_tolerance = 0.0;
    traces.push_back(run(model, cfg).trace);
  }
  REQUIRE(traces[0].size() == traces[1].size());
  REQUIRE(traces[1].size() == traces[2].size());
  for (size_t k = 0; k < traces[0].size(); ++k) {
    const double j = traces[1][k].expected_return;
    CAPTURE(k);
    CHECK(std::fabs(traces[0][k].expected_return - j) <= 1e-5 * (1.0 + std::fabs(j)));
    CHECK(std::fabs(traces[2][k].expected_return - j) <= 1e-5 * (1.0 + std::fabs(j)));
  }
}

TEST_CASE("returns are monotone across seeds with the exact engine") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = testsupport::random_instance(seed + 400, 3, 2, 2, 2, 2, 0.9);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::kBem;
    cfg.max_iterations = 40;
    cfg.seed = seed;
    const SolveResult result = run(inst.model, cfg);
    for (size_t k = 1; k < result.trace.size(); ++k) {
      CAPTURE(seed);
      CHECK(result.trace[k].expected_return >=
            result.trace[k - 1].expected_return - 1e-9);
    }
  }
}

TEST_CASE("identical configurations give bit-identical runs") {
  const DecPomdpModel model = builtin_model("chain2");
  SolverConfig cfg;
  cfg.algorithm = Algorithm::kEm;
  cfg.epsilon = 0.1;
  cfg.max_iterations = 25;
  cfg.seed = 7;
  const SolveResult a = run(model, cfg);
  const SolveResult b = run(model, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t k = 0; k < a.trace.size(); ++k)
    CHECK(a.trace[k].expected_return == b.trace[k].expected_return);
  CHECK(a.policy.pi == b.policy.pi);
  CHECK(a.policy.lambda == b.policy.lambda);
  CHECK(a.policy.nu == b.policy.nu);

  cfg.algorithm = Algorithm::kMbem;
  const SolveResult c = run(model, cfg);
  const SolveResult d = run(model, cfg);
  REQUIRE(c.trace.size() == d.trace.size());
  for (size_t k = 0; k < c.trace.size(); ++k) {
    CHECK(c.trace[k].expected_return == d.trace[k].expected_return);
    CHECK(c.trace[k].inner_iters == d.trace[k].inner_iters);
  }
}

TEST_CASE("mbem cold start respects the truncation horizon and then shrinks") {
  const DecPomdpModel model = builtin_model("toy2agent");
  SolverConfig cfg;
  cfg.algorithm = Algorithm::kMbem;
  cfg.epsilon = 0.1;
  cfg.max_iterations = 30;
  cfg.seed = 5;
  cfg.j_tolerance = 0.0;
  cfg.policy_tolerance = 0.0;
  const SolveResult result = run(model, cfg);
  const long horizon = tmax_bound(model.discount, cfg.epsilon);
  REQUIRE(!result.trace.empty());
  CHECK(result.trace[0].inner_iters <= horizon);
  for (const IterationTrace& row : result.trace) CHECK(row.inner_iters >= 1);
}

TEST_CASE("em engine records the truncation horizon as its inner count") {
  const DecPomdpModel model = builtin_model("chain2");
  SolverConfig cfg;
  cfg.algorithm = Algorithm::kEm;
  cfg.epsilon = 0.1;
  cfg.max_iterations = 3;
  cfg.seed = 1;
  const SolveResult result = run(model, cfg);
  const long horizon = tmax_bound(model.discount, cfg.epsilon);
  for (const IterationTrace& row : result.trace) CHECK(row.inner_iters == horizon);
}

TEST_CASE("run rejects invalid models and configurations") {
  auto inst = testsupport::random_instance(21, 3, 2, 2, 2, 2, 0.9);
  SolverConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(run(inst.model, cfg), std::invalid_argument);
  cfg.max_iterations = 10;
  inst.model.discount = 1.5;
  CHECK_THROWS_AS(run(inst.model, cfg), std::invalid_argument);
}
