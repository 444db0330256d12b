#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <limits>

#include "decpomdp/model.hpp"
#include "test_support.hpp"

using namespace decpomdp;

namespace {

// 1-state, 1-agent, 1-action, 1-observation identity chain.
DecPomdpModel identity_model() {
  DecPomdpModel m;
  m.num_agents = 1;
  m.states = {"s0"};
  m.actions = {{"a0"}};
  m.observations = {{"o0"}};
  m.initial_state = {1.0};
  m.transition = {1.0};
  m.observation_fn = {1.0};
  m.reward = {0.0};
  m.discount = 0.9;
  return m;
}

}  // namespace

TEST_CASE("validate_model accepts the identity chain") {
  CHECK(validate_model(identity_model()).empty());
}

TEST_CASE("validate_model reports a non-stochastic transition row with its coordinates") {
  DecPomdpModel m = identity_model();
  m.transition = {0.5};
  const auto issues = validate_model(m);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("transition row") != std::string::npos);
  CHECK(issues[0].find("s0") != std::string::npos);
}

TEST_CASE("validate_model rejects discount 1.0") {
  DecPomdpModel m = identity_model();
  m.discount = 1.0;
  const auto issues = validate_model(m);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("discount out of (0,1)") != std::string::npos);
}

TEST_CASE("validate_model is empty exactly when the invariants hold") {
  // Mutate a valid model one entry at a time; each mutation must be caught.
  DecPomdpModel base = testsupport::random_model(7, 3, 2, 2, 2, 0.9);
  REQUIRE(validate_model(base).empty());

  auto mutated = base;
  mutated.initial_state[0] += 1e-6;
  CHECK(!validate_model(mutated).empty());

  mutated = base;
  mutated.transition[4] = -mutated.transition[4] - 0.1;
  CHECK(!validate_model(mutated).empty());

  mutated = base;
  mutated.observation_fn[3] += 1e-5;
  CHECK(!validate_model(mutated).empty());

  mutated = base;
  mutated.discount = 0.0;
  CHECK(!validate_model(mutated).empty());

  mutated = base;
  mutated.reward[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK(!validate_model(mutated).empty());
}

TEST_CASE("init_policy uniform rows are exactly uniform") {
  DecPomdpModel m = testsupport::random_model(3, 2, 1, 2, 2, 0.9);
  JointPolicy p = init_policy(m, {2}, 0, InitScheme::kUniform);
  for (double v : p.pi[0]) CHECK(v == 0.5);
  for (double v : p.nu[0]) CHECK(v == 0.5);
}

TEST_CASE("init_policy is deterministic in the seed") {
  DecPomdpModel m = testsupport::random_model(11, 3, 2, 2, 2, 0.9);
  JointPolicy a = init_policy(m, {2, 3}, 42, InitScheme::kRandom);
  JointPolicy b = init_policy(m, {2, 3}, 42, InitScheme::kRandom);
  CHECK(a.pi == b.pi);
  CHECK(a.lambda == b.lambda);
  CHECK(a.nu == b.nu);
  JointPolicy c = init_policy(m, {2, 3}, 43, InitScheme::kRandom);
  CHECK(a.pi != c.pi);
}

TEST_CASE("init_policy random rows sum to 1 within 1e-12") {
  DecPomdpModel m = testsupport::random_model(5, 2, 1, 3, 2, 0.9);
  JointPolicy p = init_policy(m, {2}, 99, InitScheme::kRandom);
  for (int z = 0; z < 2; ++z) {
    double sum = 0.0;
    for (int a = 0; a < 3; ++a) sum += p.pi[0][z * 3 + a];
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("init_policy rejects a zero memory size") {
  DecPomdpModel m = identity_model();
  CHECK_THROWS_AS(init_policy(m, {0}, 0, InitScheme::kRandom), std::invalid_argument);
}

TEST_CASE("init_policy passes the policy invariants across a seed sweep") {
  DecPomdpModel m = testsupport::random_model(21, 3, 2, 2, 2, 0.9);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    JointPolicy p = init_policy(m, {2, 2}, seed, InitScheme::kRandom);
    CAPTURE(seed);
    REQUIRE(validate_policy(m, p).empty());
  }
}

TEST_CASE("reward_bounds") {
  DecPomdpModel m = identity_model();
  m.reward = {0.0};

  SUBCASE("binary table") {
    m.states = {"s0", "s1"};
    m.initial_state = {1.0, 0.0};
    m.transition = {1.0, 0.0, 0.0, 1.0};
    m.observation_fn = {1.0, 1.0};
    m.reward = {0.0, 1.0};
    const RewardBounds b = reward_bounds(m);
    CHECK(b.min == 0.0);
    CHECK(b.max == 1.0);
  }
  SUBCASE("constant table") {
    m.reward = {5.0};
    const RewardBounds b = reward_bounds(m);
    CHECK(b.min == 5.0);
    CHECK(b.max == 5.0);
  }
  SUBCASE("mixed-sign table") {
    m.states = {"s0", "s1", "s2"};
    m.initial_state = {1.0, 0.0, 0.0};
    m.transition = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    m.observation_fn = {1.0, 1.0, 1.0};
    m.reward = {-2.5, 0.0, 7.0};
    const RewardBounds b = reward_bounds(m);
    CHECK(b.min == -2.5);
    CHECK(b.max == 7.0);
  }
}
