#pragma once

#include <vector>

#include "decpomdp/kernel.hpp"

namespace decpomdp {

enum class TableRole { kFrequency, kValue, kAlpha, kBeta, kIterate };

/// Dense real-valued table over the joint X×Z index.
struct StateMemoryTable {
  std::vector<double> values;
  TableRole role = TableRole::kIterate;

  int dim() const { return static_cast<int>(values.size()); }
};

enum class EstepEngine { kEm, kBem, kMbem };

/// One E-step output: the frequency function F, the value function V, and
/// the inner-loop count it took (T_max for the truncated series, 1 for the
/// direct solve, L for the operator iteration).
struct EstepResult {
  StateMemoryTable frequency;
  StateMemoryTable value;
  long inner_iters = 0;
  EstepEngine engine = EstepEngine::kEm;
};

/// Smallest integer strictly greater than log((1−γ)ε)/log γ − 1, clamped to
/// be nonnegative. Truncating the forward/backward series there keeps both
/// sup-norm truncation errors below ε.
/// Throws ResourceError if the bound exceeds `hard_cap`.
long tmax_bound(double gamma, double epsilon, long hard_cap = 10'000'000);

/// Truncated forward–backward pass: α_0 = p0, β_0 = r̄,
/// α_{t+1} = P α_t, β_{t+1} = Pᵀ β_t, accumulated as Σ_{t≤t_max} γ^t α_t and
/// Σ_{t≤t_max} γ^t β_t.
EstepResult forward_backward(const JointChain& chain, long t_max);

/// Exact tables from the linear fixed-point equations
/// (I − γP) F = p0 and (I − γP)ᵀ V = r̄, via a dense partial-pivot LU with
/// one refinement pass. Throws NumericError (with the residual) if the
/// relative sup-norm residual of either system exceeds 1e-10.
EstepResult bellman_solve(const JointChain& chain);

/// A f = p0 + γ P f. Contraction with factor γ in the 1-norm.
StateMemoryTable apply_forward_operator(const JointChain& chain, const StateMemoryTable& f);

/// B v = r̄ + γ Pᵀ v. Contraction with factor γ in the sup norm.
StateMemoryTable apply_backward_operator(const JointChain& chain, const StateMemoryTable& v);

/// Thrown when the operator iteration hits its cap; carries the iterates
/// reached so far.
class MbemCapError : public ResourceError {
 public:
  MbemCapError(std::string message, EstepResult partial)
      : ResourceError(std::move(message)), partial_(std::move(partial)) {}
  const EstepResult& partial() const { return partial_; }

 private:
  EstepResult partial_;
};

/// Operator iteration from the given initial tables: F_L = A F_{L−1},
/// V_L = B V_{L−1}, stopping at the first L ≥ 1 where the 1-norm forward
/// increment and the sup-norm backward increment are both below
/// (1−γ)ε/γ. The returned tables are then within ε of the exact F and V in
/// sup norm. Throws MbemCapError when L reaches `l_cap` first.
EstepResult mbem_estep(const JointChain& chain, double epsilon, const StateMemoryTable& f_init,
                       const StateMemoryTable& v_init, long l_cap);

}  // namespace decpomdp
