#pragma once

#include <cstdint>
#include <vector>

#include "decpomdp/estep.hpp"
#include "decpomdp/kernel.hpp"
#include "decpomdp/types.hpp"

namespace decpomdp {

enum class Algorithm { kEm, kBem, kMbem };

const char* algorithm_name(Algorithm a);

struct SolverConfig {
  Algorithm algorithm = Algorithm::kEm;
  double epsilon = 0.1;            // E-step approximation bound (em/mbem)
  int max_iterations = 100;        // outer iteration budget
  double j_tolerance = 1e-8;       // |ΔJ| convergence threshold
  double policy_tolerance = 1e-8;  // sup-norm policy change threshold
  std::vector<int> memory_sizes;   // per agent; empty means 2 for every agent
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::kRandom;
  double l_cap_multiplier = 4.0;  // mbem cap = multiplier × T_max(γ, ε)
  bool exact_return = false;      // measure J from an exact solve each iteration
  long tmax_hard_cap = 10'000'000;
};

/// One outer-iteration record. E-step and M-step wall time are kept
/// separately; the CSV writer emits their sum.
struct IterationTrace {
  int iteration = 0;
  double expected_return = 0.0;
  long inner_iters = 0;
  double estep_ms = 0.0;
  double mstep_ms = 0.0;
  Algorithm algorithm = Algorithm::kEm;

  double elapsed_ms() const { return estep_ms + mstep_ms; }
};

struct SolveResult {
  JointPolicy policy;
  std::vector<IterationTrace> trace;
};

/// J(θ) = Σ_{x,z} F(x,z) Σ_a π(a|z) r(x,a): the expected discounted return
/// in original reward units, from contracting F with the unscaled reward.
double expected_return(const JointChain& chain, const DecPomdpModel& model,
                       const JointPolicy& policy, const StateMemoryTable& frequency);

/// The likelihood-side form of the same quantity:
/// (r_max − r_min)·⟨p0, V⟩ + r_min/(1−γ).
double expected_return_from_value(const JointChain& chain, const DecPomdpModel& model,
                                  const StateMemoryTable& value);

/// Outer EM loop for the configured algorithm: seeded θ0, then per iteration
/// chain assembly, E-step, return measurement, M-step. Stops when both the
/// |ΔJ| and the policy-change tolerances are met, or at the iteration
/// budget. The mbem engine warm-starts each E-step from the previous
/// iteration's (F, V) and cold-starts from (p0, r̄) at k = 0.
SolveResult run(const DecPomdpModel& model, const SolverConfig& config);

}  // namespace decpomdp
