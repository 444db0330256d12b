#pragma once

#include <vector>

#include "decpomdp/estep.hpp"
#include "decpomdp/kernel.hpp"
#include "decpomdp/types.hpp"

namespace decpomdp {

/// Closed-form maximizers of the Q function. Each returns the updated
/// per-agent tables; rows are normalized to sum to 1, and a row whose
/// unnormalized weights sum below 1e-300 falls back to uniform (unreachable
/// memory states, degenerate rewards).
///
/// All three consume the same (F, V) computed for `policy`; the update is
/// simultaneous, not sequentially refreshed.

std::vector<std::vector<double>> update_pi(const DecPomdpModel& model, const JointPolicy& policy,
                                           const StateMemoryTable& frequency,
                                           const StateMemoryTable& value);

std::vector<std::vector<double>> update_lambda(const DecPomdpModel& model,
                                               const JointPolicy& policy,
                                               const StateMemoryTable& frequency,
                                               const StateMemoryTable& value);

std::vector<std::vector<double>> update_nu(const DecPomdpModel& model, const JointPolicy& policy,
                                           const StateMemoryTable& value);

/// Applies all three updates and assembles the next policy.
JointPolicy mstep_update(const DecPomdpModel& model, const JointPolicy& policy,
                         const StateMemoryTable& frequency, const StateMemoryTable& value);

}  // namespace decpomdp
