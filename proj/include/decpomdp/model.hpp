#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decpomdp/types.hpp"

namespace decpomdp {

/// Absolute tolerance on probability-row sums throughout the library.
inline constexpr double kRowSumTolerance = 1e-9;

/// Checks every stochasticity and range invariant of the model and returns
/// one message per violation, each naming the offending row or entry.
/// An empty result means the model is valid.
std::vector<std::string> validate_model(const DecPomdpModel& model);

/// Same for a policy (row sums, nonnegativity, shape against the model).
std::vector<std::string> validate_policy(const DecPomdpModel& model, const JointPolicy& policy);

/// Builds a fresh policy with the given per-agent memory sizes.
/// kUniform fills every row with exactly uniform probabilities.
/// kRandom normalizes independent draws from the open interval (0,1);
/// the draw order is fixed (per agent: pi rows, lambda rows, nu), so the
/// result is reproducible from the seed on any platform.
JointPolicy init_policy(const DecPomdpModel& model, const std::vector<int>& memory_sizes,
                        std::uint64_t seed, InitScheme scheme);

struct RewardBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Exact min/max over the full r(x, a) table.
RewardBounds reward_bounds(const DecPomdpModel& model);

}  // namespace decpomdp
