#pragma once

#include <cstdint>
#include <vector>

#include "decpomdp/kernel.hpp"
#include "decpomdp/types.hpp"

namespace decpomdp::oracle {

// Brute-force evaluators for tiny instances. They deliberately share no
// index arithmetic or loops with the kernel/estep modules: everything here
// walks the model's factors directly.

struct AlphaBeta {
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// α_t and β_t by explicit summation over every length-t joint-state path
/// through the chain (no matrix recursion). Feasibility-guarded; throws
/// ResourceError when dim^(t+1) is too large.
AlphaBeta enumerate_alpha_beta(const JointChain& chain, int t);

/// Exact truncated expected return Σ_{t≤H} γ^t E[r(x_t, a_t)], stepped
/// through the generative factors (π, transition, observation, λ) with
/// explicit per-agent loops; the collapsed chain kernel is never formed.
double enumerate_return(const DecPomdpModel& model, const JointPolicy& policy, int horizon);

/// Same value by literal recursion over every (x, z, a, y) trajectory.
/// Exponential in the horizon; feasibility-guarded. Used to cross-check
/// enumerate_return at tiny horizons.
double enumerate_return_by_paths(const DecPomdpModel& model, const JointPolicy& policy,
                                 int horizon);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Seeded simulation of the generative process (state → observation →
/// memory → action), truncated at the horizon. Episode e draws from its own
/// stream derived from (seed, e), so estimates are reproducible and
/// episodes can run in parallel.
MonteCarloEstimate monte_carlo_return(const DecPomdpModel& model, const JointPolicy& policy,
                                      int episodes, int horizon, std::uint64_t seed);

}  // namespace decpomdp::oracle
