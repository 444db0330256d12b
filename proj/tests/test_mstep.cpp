#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "decpomdp/estep.hpp"
#include "decpomdp/mstep.hpp"
#include "decpomdp/solver.hpp"
#include "test_support.hpp"

using namespace decpomdp;

namespace {

// Naive transcriptions of the three maximizers, written with nothing but
// nested per-agent loops over the raw model and policy tables. They return
// the *unnormalized* weights.

double naive_pi_joint(const DecPomdpModel& m, const JointPolicy& p, const JointSpace& zs,
                      const JointSpace& as, int a, int z) {
  double v = 1.0;
  for (int i = 0; i < m.num_agents; ++i)
    v *= p.pi[i][zs.component(z, i) * as.component_size(i) + as.component(a, i)];
  return v;
}

double naive_lambda_joint(const DecPomdpModel& m, const JointPolicy& p, const JointSpace& zs,
                          const JointSpace& ys, int z, int y, int zn) {
  double v = 1.0;
  for (int i = 0; i < m.num_agents; ++i)
    v *= p.lambda[i][(zs.component(z, i) * ys.component_size(i) + ys.component(y, i)) *
                         zs.component_size(i) +
                     zs.component(zn, i)];
  return v;
}

double naive_action_kernel(const DecPomdpModel& m, const JointPolicy& p, const JointSpace& zs,
                           const JointSpace& ys, int xn, int zn, int x, int z, int a) {
  double acc = 0.0;
  for (int y = 0; y < ys.size(); ++y)
    acc += naive_lambda_joint(m, p, zs, ys, z, y, zn) * m.observation_at(xn, a, y) *
           m.transition_at(x, a, xn);
  return acc;
}

std::vector<double> naive_pi_weights(const DecPomdpModel& m, const JointPolicy& p,
                                     const StateMemoryTable& F, const StateMemoryTable& V,
                                     int agent) {
  const JointSpace zs = p.memory_space();
  const JointSpace as = m.action_space();
  const JointSpace ys = m.observation_space();
  const ScaledReward scaled = scale_reward(m);
  const int nx = m.num_states(), nz = zs.size();
  const int nzi = zs.component_size(agent), nai = as.component_size(agent);
  std::vector<double> w(static_cast<size_t>(nzi) * nai, 0.0);
  for (int a = 0; a < as.size(); ++a)
    for (int z = 0; z < nz; ++z)
      for (int x = 0; x < nx; ++x)
        for (int xn = 0; xn < nx; ++xn)
          for (int zn = 0; zn < nz; ++zn)
            w[zs.component(z, agent) * nai + as.component(a, agent)] +=
                naive_pi_joint(m, p, zs, as, a, z) *
                naive_action_kernel(m, p, zs, ys, xn, zn, x, z, a) * F.values[x * nz + z] *
                (scaled.values[static_cast<size_t>(x) * as.size() + a] +
                 m.discount * V.values[xn * nz + zn]);
  return w;
}

std::vector<double> naive_lambda_weights(const DecPomdpModel& m, const JointPolicy& p,
                                         const StateMemoryTable& F, const StateMemoryTable& V,
                                         int agent) {
  const JointSpace zs = p.memory_space();
  const JointSpace as = m.action_space();
  const JointSpace ys = m.observation_space();
  const int nx = m.num_states(), nz = zs.size();
  const int nzi = zs.component_size(agent), nyi = ys.component_size(agent);
  std::vector<double> w(static_cast<size_t>(nzi) * nyi * nzi, 0.0);
  for (int zn = 0; zn < nz; ++zn)
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ys.size(); ++y)
        for (int x = 0; x < nx; ++x)
          for (int xn = 0; xn < nx; ++xn) {
            double obs_kernel = 0.0;  // p(x',y'|x,z;π)
            for (int a = 0; a < as.size(); ++a)
              obs_kernel += m.observation_at(xn, a, y) * m.transition_at(x, a, xn) *
                            naive_pi_joint(m, p, zs, as, a, z);
            w[(zs.component(z, agent) * nyi + ys.component(y, agent)) * nzi +
              zs.component(zn, agent)] += naive_lambda_joint(m, p, zs, ys, z, y, zn) * obs_kernel *
                                          F.values[x * nz + z] * V.values[xn * nz + zn];
          }
  return w;
}

std::vector<double> naive_nu_weights(const DecPomdpModel& m, const JointPolicy& p,
                                     const StateMemoryTable& V, int agent) {
  const JointSpace zs = p.memory_space();
  const int nx = m.num_states(), nz = zs.size();
  std::vector<double> w(zs.component_size(agent), 0.0);
  for (int z = 0; z < nz; ++z) {
    double nu = 1.0;
    for (int i = 0; i < m.num_agents; ++i) nu *= p.nu[i][zs.component(z, i)];
    double acc = 0.0;
    for (int x = 0; x < nx; ++x) acc += m.initial_state[x] * V.values[x * nz + z];
    w[zs.component(z, agent)] += nu * acc;
  }
  return w;
}

void normalize_rows(std::vector<double>& w, int cols) {
  for (size_t start = 0; start < w.size(); start += cols) {
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) sum += w[start + c];
    if (sum < 1e-300) {
      for (int c = 0; c < cols; ++c) w[start + c] = 1.0 / cols;
    } else {
      for (int c = 0; c < cols; ++c) w[start + c] /= sum;
    }
  }
}

}  // namespace

TEST_CASE("update_pi collapses to certainty with a single action") {
  auto inst = testsupport::random_instance(3, 3, 2, 1, 2, 2, 0.9);
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  const auto pi = update_pi(inst.model, inst.policy, e.frequency, e.value);
  for (const auto& agent : pi)
    for (double v : agent) CHECK(v == 1.0);
}

TEST_CASE("degenerate rewards make every update fall back to uniform") {
  auto inst = testsupport::random_instance(5, 3, 2, 2, 2, 2, 0.9);
  for (double& r : inst.model.reward) r = 5.0;  // constant
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  REQUIRE(chain.reward_degenerate);
  const EstepResult e = bellman_solve(chain);
  const JointPolicy next = mstep_update(inst.model, inst.policy, e.frequency, e.value);
  for (int i = 0; i < 2; ++i) {
    for (double v : next.pi[i]) CHECK(v == 0.5);
    for (double v : next.lambda[i]) CHECK(v == 0.5);
    for (double v : next.nu[i]) CHECK(v == 0.5);
  }
}

TEST_CASE("update_pi matches the naive nested-loop evaluation") {
  auto inst = testsupport::random_instance(7, 2, 2, 2, 2, 2, 0.9);
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  const auto pi = update_pi(inst.model, inst.policy, e.frequency, e.value);
  for (int i = 0; i < 2; ++i) {
    std::vector<double> w = naive_pi_weights(inst.model, inst.policy, e.frequency, e.value, i);
    for (double x : w) CHECK(x >= 0.0);  // provably nonnegative weights
    normalize_rows(w, 2);
    CHECK(testsupport::sup_diff(pi[i], w) <= 1e-12);
  }
}

TEST_CASE("update_lambda matches the naive nested-loop evaluation") {
  auto inst = testsupport::random_instance(11, 2, 2, 2, 2, 2, 0.9);
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  const auto lambda = update_lambda(inst.model, inst.policy, e.frequency, e.value);
  for (int i = 0; i < 2; ++i) {
    std::vector<double> w =
        naive_lambda_weights(inst.model, inst.policy, e.frequency, e.value, i);
    for (double x : w) CHECK(x >= 0.0);
    normalize_rows(w, 2);
    CHECK(testsupport::sup_diff(lambda[i], w) <= 1e-12);
  }
}

TEST_CASE("update_nu matches the naive nested-loop evaluation") {
  auto inst = testsupport::random_instance(13, 2, 2, 2, 2, 2, 0.9);
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  const auto nu = update_nu(inst.model, inst.policy, e.value);
  for (int i = 0; i < 2; ++i) {
    std::vector<double> w = naive_nu_weights(inst.model, inst.policy, e.value, i);
    normalize_rows(w, 2);
    CHECK(testsupport::sup_diff(nu[i], w) <= 1e-12);
  }
}

TEST_CASE("single-memory controllers keep lambda and nu at certainty") {
  auto inst = testsupport::random_instance(17, 3, 2, 2, 2, 1, 0.9);
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  const auto lambda = update_lambda(inst.model, inst.policy, e.frequency, e.value);
  const auto nu = update_nu(inst.model, inst.policy, e.value);
  for (int i = 0; i < 2; ++i) {
    for (double v : lambda[i]) CHECK(v == 1.0);
    REQUIRE(nu[i].size() == 1);
    CHECK(nu[i][0] == 1.0);
  }
}

TEST_CASE("a constant value function preserves the nu marginals") {
  auto inst = testsupport::random_instance(19, 3, 2, 2, 2, 2, 0.9);
  StateMemoryTable v{std::vector<double>(12, 3.7), TableRole::kValue};
  const auto nu = update_nu(inst.model, inst.policy, v);
  for (int i = 0; i < 2; ++i)
    for (int z = 0; z < 2; ++z)
      CHECK(nu[i][z] == doctest::Approx(inst.policy.nu[i][z]).epsilon(1e-12));
}

TEST_CASE("updated rows are stochastic within 1e-12") {
  auto inst = testsupport::random_instance(23, 4, 2, 3, 2, 2, 0.95);
  const JointChain chain = build_joint_chain(inst.model, inst.policy);
  const EstepResult e = bellman_solve(chain);
  const JointPolicy next = mstep_update(inst.model, inst.policy, e.frequency, e.value);
  REQUIRE(validate_policy(inst.model, next).empty());
  for (int i = 0; i < 2; ++i) {
    for (int z = 0; z < 2; ++z) {
      double sum = 0.0;
      for (int a = 0; a < 3; ++a) sum += next.pi[i][z * 3 + a];
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
    double nus = 0.0;
    for (double v : next.nu[i]) nus += v;
    CHECK(std::fabs(nus - 1.0) <= 1e-12);
  }
}

TEST_CASE("exact E-steps give a monotone expected return") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto inst = testsupport::random_instance(seed, 3, 2, 2, 2, 2, 0.9);
    JointPolicy policy = inst.policy;
    double previous = -1e300;
    for (int k = 0; k < 30; ++k) {
      const JointChain chain = build_joint_chain(inst.model, policy);
      const EstepResult e = bellman_solve(chain);
      const double j = expected_return(chain, inst.model, policy, e.frequency);
      CAPTURE(seed);
      CAPTURE(k);
      CHECK(j >= previous - 1e-9);
      previous = j;
      policy = mstep_update(inst.model, policy, e.frequency, e.value);
    }
  }
}

TEST_CASE("a converged policy is a fixed point of the update") {
  // Seed 31 reaches a policy change below 1e-11 in under a thousand exact
  // iterations; at that point one further update must stay within 1e-10.
  auto inst = testsupport::random_instance(31, 3, 2, 2, 2, 2, 0.9);
  JointPolicy policy = init_policy(inst.model, {2, 2}, 31, InitScheme::kRandom);

  auto sup_change = [](const JointPolicy& a, const JointPolicy& b) {
    double change = 0.0;
    for (int i = 0; i < a.num_agents(); ++i) {
      change = std::max(change, testsupport::sup_diff(a.pi[i], b.pi[i]));
      change = std::max(change, testsupport::sup_diff(a.lambda[i], b.lambda[i]));
      change = std::max(change, testsupport::sup_diff(a.nu[i], b.nu[i]));
    }
    return change;
  };

  double change = 1.0;
  for (int k = 0; k < 5000 && change > 1e-11; ++k) {
    const JointChain chain = build_joint_chain(inst.model, policy);
    const EstepResult e = bellman_solve(chain);
    JointPolicy next = mstep_update(inst.model, policy, e.frequency, e.value);
    change = sup_change(next, policy);
    policy = std::move(next);
  }
  REQUIRE(change <= 1e-11);  // converged

  const JointChain chain = build_joint_chain(inst.model, policy);
  const EstepResult e = bellman_solve(chain);
  const JointPolicy next = mstep_update(inst.model, policy, e.frequency, e.value);
  CHECK(sup_change(next, policy) <= 1e-10);
}
