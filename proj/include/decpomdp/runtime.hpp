#pragma once

#include <cstdint>

namespace decpomdp {

/// Worker count for the parallel kernels: DECPOMDP_THREADS if set to a
/// positive integer, otherwise the machine parallelism. Read once.
int thread_count();

/// Uniform double in the open interval (0,1) from a 64-bit word; used
/// instead of std::uniform_real_distribution so seeded draws are identical
/// across standard libraries.
inline double uniform01(std::uint64_t word) {
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace decpomdp
