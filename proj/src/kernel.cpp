#include "decpomdp/kernel.hpp"

#include <stdexcept>

#include "decpomdp/kernels.hpp"
#include "decpomdp/model.hpp"

namespace decpomdp {

namespace {

void check_shapes(const DecPomdpModel& model, const JointPolicy& policy) {
  if (policy.num_agents() != model.num_agents)
    throw std::invalid_argument("policy agent count does not match the model");
  for (int i = 0; i < model.num_agents; ++i) {
    const int nz = policy.memory_sizes[i];
    const int nai = static_cast<int>(model.actions[i].size());
    const int nyi = static_cast<int>(model.observations[i].size());
    if (static_cast<int>(policy.pi[i].size()) != nz * nai)
      throw std::invalid_argument("pi table shape mismatch for agent " + std::to_string(i));
    if (static_cast<int>(policy.lambda[i].size()) != nz * nyi * nz)
      throw std::invalid_argument("lambda table shape mismatch for agent " + std::to_string(i));
    if (static_cast<int>(policy.nu[i].size()) != nz)
      throw std::invalid_argument("nu table shape mismatch for agent " + std::to_string(i));
  }
}

kernels::ChainInputs chain_inputs(const DecPomdpModel& model, const JointPolicyTables& tables,
                                  int nz) {
  kernels::ChainInputs in;
  in.transition = model.transition;
  in.observation = model.observation_fn;
  in.joint_pi = tables.pi;
  in.joint_lambda = tables.lambda;
  in.nx = model.num_states();
  in.nz = nz;
  in.na = model.num_joint_actions();
  in.ny = model.num_joint_observations();
  return in;
}

}  // namespace

JointPolicyTables expand_joint_policy(const DecPomdpModel& model, const JointPolicy& policy) {
  check_shapes(model, policy);
  const JointSpace zs = policy.memory_space();
  const JointSpace as = model.action_space();
  const JointSpace ys = model.observation_space();
  const int nz = zs.size(), na = as.size(), ny = ys.size();
  const int n = model.num_agents;

  JointPolicyTables t;
  t.pi.assign(static_cast<size_t>(nz) * na, 1.0);
  for (int z = 0; z < nz; ++z)
    for (int a = 0; a < na; ++a) {
      double p = 1.0;
      for (int i = 0; i < n; ++i)
        p *= policy.pi[i][static_cast<size_t>(zs.component(z, i)) * as.component_size(i) +
                          as.component(a, i)];
      t.pi[static_cast<size_t>(z) * na + a] = p;
    }

  t.lambda.assign(static_cast<size_t>(nz) * ny * nz, 1.0);
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int zn = 0; zn < nz; ++zn) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
          const int nzi = zs.component_size(i), nyi = ys.component_size(i);
          p *= policy.lambda[i][(static_cast<size_t>(zs.component(z, i)) * nyi +
                                 ys.component(y, i)) *
                                    nzi +
                                zs.component(zn, i)];
        }
        t.lambda[(static_cast<size_t>(z) * ny + y) * nz + zn] = p;
      }

  t.nu.assign(nz, 1.0);
  for (int z = 0; z < nz; ++z) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= policy.nu[i][zs.component(z, i)];
    t.nu[z] = p;
  }
  return t;
}

ScaledReward scale_reward(const DecPomdpModel& model) {
  const RewardBounds b = reward_bounds(model);
  ScaledReward out;
  out.values.assign(model.reward.size(), 0.0);
  if (b.max == b.min) {
    out.degenerate = true;
    return out;
  }
  const double span = b.max - b.min;
  for (size_t i = 0; i < model.reward.size(); ++i)
    out.values[i] = (model.reward[i] - b.min) / span;
  return out;
}

JointChain build_joint_chain(const DecPomdpModel& model, const JointPolicy& policy) {
  const JointPolicyTables tables = expand_joint_policy(model, policy);
  const int nx = model.num_states();
  const int nz = policy.memory_space().size();
  const int na = model.num_joint_actions();
  const int dim = nx * nz;

  JointChain chain;
  chain.num_states = nx;
  chain.num_memories = nz;
  chain.gamma = model.discount;

  chain.kernel.assign(static_cast<size_t>(dim) * dim, 0.0);
  kernels::assemble_joint_kernel(chain_inputs(model, tables, nz), chain.kernel);

  chain.initial.assign(dim, 0.0);
  for (int x = 0; x < nx; ++x)
    for (int z = 0; z < nz; ++z)
      chain.initial[static_cast<size_t>(x) * nz + z] = model.initial_state[x] * tables.nu[z];

  const ScaledReward scaled = scale_reward(model);
  chain.reward_degenerate = scaled.degenerate;
  chain.scaled_reward.assign(dim, 0.0);
  for (int x = 0; x < nx; ++x)
    for (int z = 0; z < nz; ++z) {
      double acc = 0.0;
      for (int a = 0; a < na; ++a)
        acc += tables.pi[static_cast<size_t>(z) * na + a] *
               scaled.values[static_cast<size_t>(x) * na + a];
      chain.scaled_reward[static_cast<size_t>(x) * nz + z] = acc;
    }
  return chain;
}

std::vector<std::vector<double>> action_conditioned_kernel(const DecPomdpModel& model,
                                                           const JointPolicy& policy) {
  const JointPolicyTables tables = expand_joint_policy(model, policy);
  const int nz = policy.memory_space().size();
  const int na = model.num_joint_actions();
  const int dim = model.num_states() * nz;
  const size_t per_action = static_cast<size_t>(dim) * dim;

  std::vector<double> flat(per_action * na, 0.0);
  kernels::assemble_action_kernel(chain_inputs(model, tables, nz), flat);

  std::vector<std::vector<double>> out(na);
  for (int a = 0; a < na; ++a)
    out[a].assign(flat.begin() + a * per_action, flat.begin() + (a + 1) * per_action);
  return out;
}

std::vector<double> observation_conditioned_kernel(const DecPomdpModel& model,
                                                   const JointPolicy& policy) {
  const JointPolicyTables tables = expand_joint_policy(model, policy);
  const int nz = policy.memory_space().size();
  const int ny = model.num_joint_observations();
  const int dim = model.num_states() * nz;

  std::vector<double> out(static_cast<size_t>(model.num_states()) * ny * dim, 0.0);
  kernels::assemble_observation_kernel(chain_inputs(model, tables, nz), out);
  return out;
}

}  // namespace decpomdp
