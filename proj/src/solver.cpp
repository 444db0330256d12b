#include "decpomdp/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "decpomdp/model.hpp"
#include "decpomdp/mstep.hpp"

namespace decpomdp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double policy_sup_change(const JointPolicy& a, const JointPolicy& b) {
  double m = 0.0;
  for (int i = 0; i < a.num_agents(); ++i) {
    for (size_t k = 0; k < a.pi[i].size(); ++k)
      m = std::max(m, std::fabs(a.pi[i][k] - b.pi[i][k]));
    for (size_t k = 0; k < a.lambda[i].size(); ++k)
      m = std::max(m, std::fabs(a.lambda[i][k] - b.lambda[i][k]));
    for (size_t k = 0; k < a.nu[i].size(); ++k)
      m = std::max(m, std::fabs(a.nu[i][k] - b.nu[i][k]));
  }
  return m;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kEm: return "em";
    case Algorithm::kBem: return "bem";
    case Algorithm::kMbem: return "mbem";
  }
  return "?";
}

double expected_return(const JointChain& chain, const DecPomdpModel& model,
                       const JointPolicy& policy, const StateMemoryTable& frequency) {
  if (frequency.dim() != chain.dim())
    throw std::invalid_argument("frequency table does not match the chain dimension");
  const JointPolicyTables tables = expand_joint_policy(model, policy);
  const int nx = model.num_states();
  const int nz = chain.num_memories;
  const int na = model.num_joint_actions();

  double j = 0.0;
  for (int x = 0; x < nx; ++x)
    for (int z = 0; z < nz; ++z) {
      double mean_reward = 0.0;
      for (int a = 0; a < na; ++a)
        mean_reward += tables.pi[static_cast<size_t>(z) * na + a] *
                       model.reward[static_cast<size_t>(x) * na + a];
      j += frequency.values[static_cast<size_t>(x) * nz + z] * mean_reward;
    }
  return j;
}

double expected_return_from_value(const JointChain& chain, const DecPomdpModel& model,
                                  const StateMemoryTable& value) {
  if (value.dim() != chain.dim())
    throw std::invalid_argument("value table does not match the chain dimension");
  const RewardBounds b = reward_bounds(model);
  double inner = 0.0;
  for (int i = 0; i < chain.dim(); ++i) inner += chain.initial[i] * value.values[i];
  return (b.max - b.min) * inner + b.min / (1.0 - chain.gamma);
}

SolveResult run(const DecPomdpModel& model, const SolverConfig& config) {
  {
    const auto issues = validate_model(model);
    if (!issues.empty()) throw std::invalid_argument("invalid model: " + issues.front());
  }
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

  std::vector<int> memory_sizes = config.memory_sizes;
  if (memory_sizes.empty()) memory_sizes.assign(model.num_agents, 2);

  JointPolicy policy = init_policy(model, memory_sizes, config.seed, config.init);

  long series_horizon = 0;
  long l_cap = 0;
  if (config.algorithm == Algorithm::kEm) {
    series_horizon = tmax_bound(model.discount, config.epsilon, config.tmax_hard_cap);
  } else if (config.algorithm == Algorithm::kMbem) {
    const long t = tmax_bound(model.discount, config.epsilon, config.tmax_hard_cap);
    l_cap = std::max<long>(1, static_cast<long>(std::ceil(config.l_cap_multiplier *
                                                          static_cast<double>(t))));
  }

  SolveResult result;
  StateMemoryTable warm_freq, warm_value;
  double previous_return = 0.0;

  for (int k = 0; k < config.max_iterations; ++k) {
    const auto estep_start = Clock::now();
    const JointChain chain = build_joint_chain(model, policy);

    EstepResult estep;
    switch (config.algorithm) {
      case Algorithm::kEm:
        estep = forward_backward(chain, series_horizon);
        break;
      case Algorithm::kBem:
        estep = bellman_solve(chain);
        break;
      case Algorithm::kMbem: {
        const bool cold = (k == 0);
        const StateMemoryTable f0 = cold ? StateMemoryTable{chain.initial, TableRole::kIterate}
                                         : warm_freq;
        const StateMemoryTable v0 = cold
                                        ? StateMemoryTable{chain.scaled_reward, TableRole::kIterate}
                                        : warm_value;
        estep = mbem_estep(chain, config.epsilon, f0, v0, l_cap);
        break;
      }
    }
    const double estep_ms = ms_since(estep_start);

    // Return measurement is kept outside the timed sections; the exact
    // variant adds a solve that is not part of the algorithm under test.
    double j;
    if (config.exact_return && config.algorithm != Algorithm::kBem) {
      j = expected_return(chain, model, policy, bellman_solve(chain).frequency);
    } else {
      j = expected_return(chain, model, policy, estep.frequency);
    }
    if (!std::isfinite(j))
      throw NumericError("expected return became non-finite at iteration " + std::to_string(k));

    const auto mstep_start = Clock::now();
    JointPolicy next = mstep_update(model, policy, estep.frequency, estep.value);
    const double mstep_ms = ms_since(mstep_start);

    result.trace.push_back(
        IterationTrace{k, j, estep.inner_iters, estep_ms, mstep_ms, config.algorithm});

    const double policy_change = policy_sup_change(next, policy);
    const bool converged = k > 0 && std::fabs(j - previous_return) < config.j_tolerance &&
                           policy_change < config.policy_tolerance;

    if (config.algorithm == Algorithm::kMbem) {
      warm_freq = std::move(estep.frequency);
      warm_value = std::move(estep.value);
    }
    previous_return = j;
    policy = std::move(next);
    if (converged) break;
  }

  result.policy = std::move(policy);
  return result;
}

}  // namespace decpomdp
