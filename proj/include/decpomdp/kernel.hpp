#pragma once

#include <vector>

#include "decpomdp/types.hpp"

namespace decpomdp {

/// Reward rescaled affinely into [0,1]. If the reward table is constant the
/// rescaling is undefined; the table is all zero and `degenerate` is set
/// (planning is vacuous for such models).
struct ScaledReward {
  std::vector<double> values;  // [x*|A| + a]
  bool degenerate = false;
};

ScaledReward scale_reward(const DecPomdpModel& model);

/// The Markov chain induced on the joint state-memory space X×Z by a model
/// and a policy. Flat joint index i = x*|Z| + z, with z the row-major
/// flattening of the per-agent memories (agent 0 most significant).
///
/// kernel[dest*dim + src] = p(x',z' | x,z; θ); every source column sums to 1.
struct JointChain {
  int num_states = 0;
  int num_memories = 0;
  double gamma = 0.0;
  bool reward_degenerate = false;
  std::vector<double> kernel;         // dim × dim, dest-major
  std::vector<double> initial;        // p0(x)·ν(z)
  std::vector<double> scaled_reward;  // Σ_a π(a|z)·r̄(x,a), in [0,1]

  int dim() const { return num_states * num_memories; }
};

/// Assembles the full chain: kernel as the quadruple sum
/// Σ_{y',a} λ(z'|z,y')·p(y'|x',a)·p(x'|x,a)·π(a|z), plus the initial
/// distribution and the policy-averaged scaled reward.
/// Throws std::invalid_argument on model/policy shape mismatch.
JointChain build_joint_chain(const DecPomdpModel& model, const JointPolicy& policy);

/// p(x',z' | x,z, a; λ) = Σ_{y'} λ(z'|z,y')·p(y'|x',a)·p(x'|x,a),
/// one dim×dim table per joint action. Contracting with π(a|z) over a
/// reproduces the chain kernel.
std::vector<std::vector<double>> action_conditioned_kernel(const DecPomdpModel& model,
                                                           const JointPolicy& policy);

/// p(x',y' | x,z; π) = Σ_a p(y'|x',a)·p(x'|x,a)·π(a|z), laid out as
/// [(x'*|Y| + y')*dim + src]. Contracting with λ(z'|z,y') over y'
/// reproduces the chain kernel.
std::vector<double> observation_conditioned_kernel(const DecPomdpModel& model,
                                                   const JointPolicy& policy);

/// Joint policy tables expanded over the flattened joint spaces; shared by
/// the chain assembly and the M-step.
///   pi[z*|A| + a]             = Π_i π^i(a^i | z^i)
///   lambda[(z*|Y| + y)*|Z| + z'] = Π_i λ^i(z'^i | z^i, y^i)
///   nu[z]                     = Π_i ν^i(z^i)
struct JointPolicyTables {
  std::vector<double> pi;
  std::vector<double> lambda;
  std::vector<double> nu;
};

JointPolicyTables expand_joint_policy(const DecPomdpModel& model, const JointPolicy& policy);

}  // namespace decpomdp
