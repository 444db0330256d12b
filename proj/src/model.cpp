#include "decpomdp/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "decpomdp/runtime.hpp"

namespace decpomdp {

namespace {

bool row_ok(std::span<const double> row, double* sum_out) {
  double sum = 0.0;
  bool nonneg = true;
  for (double p : row) {
    if (!(p >= 0.0)) nonneg = false;  // also catches NaN
    sum += p;
  }
  *sum_out = sum;
  return nonneg && std::fabs(sum - 1.0) <= kRowSumTolerance;
}

std::string joint_action_label(const DecPomdpModel& m, int a) {
  JointSpace as = m.action_space();
  std::string out;
  for (int i = 0; i < m.num_agents; ++i) {
    if (i) out += ' ';
    out += m.actions[i][as.component(a, i)];
  }
  return out;
}

}  // namespace

std::vector<std::string> validate_model(const DecPomdpModel& model) {
  std::vector<std::string> issues;
  const int nx = model.num_states();
  const int na = model.num_joint_actions();
  const int ny = model.num_joint_observations();

  if (model.num_agents < 1) issues.push_back("number of agents must be positive");
  if (nx < 1) issues.push_back("state set is empty");
  for (int i = 0; i < model.num_agents; ++i) {
    if (static_cast<int>(model.actions.size()) > i && model.actions[i].empty())
      issues.push_back("agent " + std::to_string(i) + " has an empty action set");
    if (static_cast<int>(model.observations.size()) > i && model.observations[i].empty())
      issues.push_back("agent " + std::to_string(i) + " has an empty observation set");
  }
  if (!(model.discount > 0.0 && model.discount < 1.0))
    issues.push_back("discount out of (0,1): " + std::to_string(model.discount));

  double sum = 0.0;
  if (static_cast<int>(model.initial_state.size()) != nx) {
    issues.push_back("initial state vector has wrong length");
  } else if (!row_ok(model.initial_state, &sum)) {
    issues.push_back("initial state distribution sums to " + std::to_string(sum) +
                     " or has negative entries");
  }

  if (static_cast<int>(model.transition.size()) != static_cast<long>(nx) * na * nx) {
    issues.push_back("transition table has wrong size");
  } else {
    for (int x = 0; x < nx; ++x)
      for (int a = 0; a < na; ++a) {
        std::span<const double> row(&model.transition[(static_cast<size_t>(x) * na + a) * nx], nx);
        if (!row_ok(row, &sum))
          issues.push_back("transition row (x=" + model.states[x] + ", a=" +
                           joint_action_label(model, a) + ") sums to " + std::to_string(sum) +
                           " or has negative entries");
      }
  }

  if (static_cast<int>(model.observation_fn.size()) != static_cast<long>(nx) * na * ny) {
    issues.push_back("observation table has wrong size");
  } else {
    for (int xn = 0; xn < nx; ++xn)
      for (int a = 0; a < na; ++a) {
        std::span<const double> row(&model.observation_fn[(static_cast<size_t>(xn) * na + a) * ny],
                                    ny);
        if (!row_ok(row, &sum))
          issues.push_back("observation row (x'=" + model.states[xn] + ", a=" +
                           joint_action_label(model, a) + ") sums to " + std::to_string(sum) +
                           " or has negative entries");
      }
  }

  if (static_cast<int>(model.reward.size()) != static_cast<long>(nx) * na)
    issues.push_back("reward table has wrong size");
  for (double r : model.reward)
    if (!std::isfinite(r)) {
      issues.push_back("reward table contains a non-finite entry");
      break;
    }

  return issues;
}

std::vector<std::string> validate_policy(const DecPomdpModel& model, const JointPolicy& policy) {
  std::vector<std::string> issues;
  if (policy.num_agents() != model.num_agents) {
    issues.push_back("policy agent count does not match the model");
    return issues;
  }
  double sum = 0.0;
  for (int i = 0; i < policy.num_agents(); ++i) {
    const int nz = policy.memory_sizes[i];
    const int nai = static_cast<int>(model.actions[i].size());
    const int nyi = static_cast<int>(model.observations[i].size());
    if (nz < 1) issues.push_back("agent " + std::to_string(i) + " memory size is not positive");
    if (static_cast<int>(policy.pi[i].size()) != nz * nai ||
        static_cast<int>(policy.lambda[i].size()) != nz * nyi * nz ||
        static_cast<int>(policy.nu[i].size()) != nz) {
      issues.push_back("agent " + std::to_string(i) + " policy tables have wrong shape");
      continue;
    }
    for (int z = 0; z < nz; ++z) {
      std::span<const double> row(&policy.pi[i][static_cast<size_t>(z) * nai], nai);
      if (!row_ok(row, &sum))
        issues.push_back("pi row (agent " + std::to_string(i) + ", z=" + std::to_string(z) +
                         ") sums to " + std::to_string(sum) + " or has negative entries");
    }
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < nyi; ++y) {
        std::span<const double> row(&policy.lambda[i][(static_cast<size_t>(z) * nyi + y) * nz],
                                    nz);
        if (!row_ok(row, &sum))
          issues.push_back("lambda row (agent " + std::to_string(i) + ", z=" + std::to_string(z) +
                           ", y'=" + std::to_string(y) + ") sums to " + std::to_string(sum) +
                           " or has negative entries");
      }
    if (!row_ok(policy.nu[i], &sum))
      issues.push_back("nu (agent " + std::to_string(i) + ") sums to " + std::to_string(sum) +
                       " or has negative entries");
  }
  return issues;
}

JointPolicy init_policy(const DecPomdpModel& model, const std::vector<int>& memory_sizes,
                        std::uint64_t seed, InitScheme scheme) {
  if (static_cast<int>(memory_sizes.size()) != model.num_agents)
    throw std::invalid_argument("memory_sizes must have one entry per agent");
  for (int m : memory_sizes)
    if (m < 1) throw std::invalid_argument("memory sizes must be at least 1");

  std::mt19937_64 rng(seed);
  auto fill_row = [&](std::span<double> row) {
    if (scheme == InitScheme::kUniform) {
      const double p = 1.0 / static_cast<double>(row.size());
      for (double& v : row) v = p;
      return;
    }
    double sum = 0.0;
    for (double& v : row) {
      v = uniform01(rng());
      sum += v;
    }
    for (double& v : row) v /= sum;
  };

  JointPolicy policy;
  policy.memory_sizes = memory_sizes;
  policy.pi.resize(model.num_agents);
  policy.lambda.resize(model.num_agents);
  policy.nu.resize(model.num_agents);
  for (int i = 0; i < model.num_agents; ++i) {
    const int nz = memory_sizes[i];
    const int nai = static_cast<int>(model.actions[i].size());
    const int nyi = static_cast<int>(model.observations[i].size());
    policy.pi[i].assign(static_cast<size_t>(nz) * nai, 0.0);
    policy.lambda[i].assign(static_cast<size_t>(nz) * nyi * nz, 0.0);
    policy.nu[i].assign(nz, 0.0);
    for (int z = 0; z < nz; ++z) fill_row({&policy.pi[i][static_cast<size_t>(z) * nai], static_cast<size_t>(nai)});
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < nyi; ++y)
        fill_row({&policy.lambda[i][(static_cast<size_t>(z) * nyi + y) * nz], static_cast<size_t>(nz)});
    fill_row(policy.nu[i]);
  }
  return policy;
}

RewardBounds reward_bounds(const DecPomdpModel& model) {
  RewardBounds b{model.reward.front(), model.reward.front()};
  for (double r : model.reward) {
    if (r < b.min) b.min = r;
    if (r > b.max) b.max = r;
  }
  return b;
}

}  // namespace decpomdp
