#include "decpomdp/estep.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "decpomdp/kernels.hpp"

namespace decpomdp {

namespace {

void check_dim(const JointChain& chain, const StateMemoryTable& t, const char* what) {
  if (t.dim() != chain.dim())
    throw std::invalid_argument(std::string(what) + " has dimension " + std::to_string(t.dim()) +
                                ", chain has " + std::to_string(chain.dim()));
}

double one_norm_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void ensure_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(what) + " contains a non-finite value");
}

}  // namespace

long tmax_bound(double gamma, double epsilon, long hard_cap) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double raw = std::log((1.0 - gamma) * epsilon) / std::log(gamma) - 1.0;
  if (raw >= static_cast<double>(hard_cap))
    throw ResourceError("truncation horizon " + std::to_string(raw) + " exceeds the cap " +
                        std::to_string(hard_cap));
  const long t = static_cast<long>(std::floor(raw)) + 1;  // smallest integer strictly above raw
  return t < 0 ? 0 : t;
}

EstepResult forward_backward(const JointChain& chain, long t_max) {
  if (t_max < 0) throw std::invalid_argument("t_max must be nonnegative");
  const int n = chain.dim();

  std::vector<double> alpha = chain.initial;
  std::vector<double> beta = chain.scaled_reward;
  std::vector<double> alpha_next(n), beta_next(n);
  std::vector<double> freq = alpha;
  std::vector<double> value = beta;

  double discount_pow = 1.0;
  for (long t = 1; t <= t_max; ++t) {
    kernels::matvec(chain.kernel, alpha, alpha_next, n);
    kernels::matvec_transpose(chain.kernel, beta, beta_next, n);
    alpha.swap(alpha_next);
    beta.swap(beta_next);
    discount_pow *= chain.gamma;
    for (int i = 0; i < n; ++i) {
      freq[i] += discount_pow * alpha[i];
      value[i] += discount_pow * beta[i];
    }
  }
  ensure_finite(freq, "frequency table");
  ensure_finite(value, "value table");

  return EstepResult{{std::move(freq), TableRole::kFrequency},
                     {std::move(value), TableRole::kValue},
                     t_max,
                     EstepEngine::kEm};
}

EstepResult bellman_solve(const JointChain& chain) {
  const int n = chain.dim();
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  Eigen::Map<const MatrixXd> kernel_rowmajor_as_colmajor(chain.kernel.data(), n, n);
  // kernel is dest-major (row-major); mapping column-major yields Pᵀ.
  MatrixXd system = MatrixXd::Identity(n, n) - chain.gamma * kernel_rowmajor_as_colmajor.transpose();

  Eigen::Map<const VectorXd> p0(chain.initial.data(), n);
  Eigen::Map<const VectorXd> rbar(chain.scaled_reward.data(), n);

  Eigen::PartialPivLU<MatrixXd> lu(system);
  VectorXd freq = lu.solve(p0);
  freq += lu.solve(p0 - system * freq);  // one refinement pass
  const MatrixXd system_t = system.transpose();
  Eigen::PartialPivLU<MatrixXd> lu_t(system_t);
  VectorXd value = lu_t.solve(rbar);
  value += lu_t.solve(rbar - system_t * value);

  const double freq_residual = (freq - (p0 + chain.gamma * kernel_rowmajor_as_colmajor.transpose() * freq))
                                   .lpNorm<Eigen::Infinity>();
  const double value_residual =
      (value - (rbar + chain.gamma * kernel_rowmajor_as_colmajor * value)).lpNorm<Eigen::Infinity>();
  const double freq_scale = std::max(freq.lpNorm<Eigen::Infinity>(), 1e-300);
  const double value_scale = std::max(value.lpNorm<Eigen::Infinity>(), 1e-300);
  if (!std::isfinite(freq_residual) || !std::isfinite(value_residual) ||
      freq_residual > 1e-10 * freq_scale || value_residual > 1e-10 * value_scale)
    throw NumericError("linear solve residuals too large: F " + std::to_string(freq_residual) +
                       ", V " + std::to_string(value_residual));

  EstepResult out;
  out.frequency = {std::vector<double>(freq.data(), freq.data() + n), TableRole::kFrequency};
  out.value = {std::vector<double>(value.data(), value.data() + n), TableRole::kValue};
  out.inner_iters = 1;
  out.engine = EstepEngine::kBem;
  return out;
}

StateMemoryTable apply_forward_operator(const JointChain& chain, const StateMemoryTable& f) {
  check_dim(chain, f, "forward operand");
  const int n = chain.dim();
  StateMemoryTable out;
  out.role = f.role;
  out.values.assign(n, 0.0);
  kernels::matvec(chain.kernel, f.values, out.values, n);
  for (int i = 0; i < n; ++i) out.values[i] = chain.initial[i] + chain.gamma * out.values[i];
  return out;
}

StateMemoryTable apply_backward_operator(const JointChain& chain, const StateMemoryTable& v) {
  check_dim(chain, v, "backward operand");
  const int n = chain.dim();
  StateMemoryTable out;
  out.role = v.role;
  out.values.assign(n, 0.0);
  kernels::matvec_transpose(chain.kernel, v.values, out.values, n);
  for (int i = 0; i < n; ++i) out.values[i] = chain.scaled_reward[i] + chain.gamma * out.values[i];
  return out;
}

EstepResult mbem_estep(const JointChain& chain, double epsilon, const StateMemoryTable& f_init,
                       const StateMemoryTable& v_init, long l_cap) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (l_cap < 1) throw std::invalid_argument("l_cap must be at least 1");
  check_dim(chain, f_init, "forward initializer");
  check_dim(chain, v_init, "backward initializer");

  const double threshold = (1.0 - chain.gamma) / chain.gamma * epsilon;
  StateMemoryTable freq = f_init;
  StateMemoryTable value = v_init;
  freq.role = TableRole::kFrequency;
  value.role = TableRole::kValue;

  long iters = 0;
  for (;;) {
    StateMemoryTable freq_next = apply_forward_operator(chain, freq);
    StateMemoryTable value_next = apply_backward_operator(chain, value);
    freq_next.role = TableRole::kFrequency;
    value_next.role = TableRole::kValue;
    ++iters;
    const double freq_step = one_norm_diff(freq_next.values, freq.values);
    const double value_step = sup_norm_diff(value_next.values, value.values);
    freq = std::move(freq_next);
    value = std::move(value_next);
    if (std::max(freq_step, value_step) < threshold) break;
    if (iters >= l_cap) {
      EstepResult partial{freq, value, iters, EstepEngine::kMbem};
      throw MbemCapError("operator iteration hit the cap of " + std::to_string(l_cap) +
                         " applications (last increments " + std::to_string(freq_step) + ", " +
                         std::to_string(value_step) + ")",
                         std::move(partial));
    }
  }
  ensure_finite(freq.values, "frequency table");
  ensure_finite(value.values, "value table");
  return EstepResult{std::move(freq), std::move(value), iters, EstepEngine::kMbem};
}

}  // namespace decpomdp
