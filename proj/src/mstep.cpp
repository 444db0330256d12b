#include "decpomdp/mstep.hpp"

#include <cmath>
#include <stdexcept>

#include "decpomdp/kernels.hpp"
#include "decpomdp/runtime.hpp"

namespace decpomdp {

namespace {

// Rows whose weights sum below this fall back to uniform (zero-measure
// rows: unreachable memories, degenerate rewards).
constexpr double kZeroRowThreshold = 1e-300;

void normalize_row(std::span<double> row) {
  double sum = 0.0;
  for (double& w : row) {
    if (w < 0.0) w = (w > -1e-12) ? 0.0 : w;  // solver roundoff only
    sum += w;
  }
  // Weights are products of probabilities with nonnegative tables; anything
  // meaningfully negative is a corrupted E-step, not a zero-measure row.
  if (sum < -1e-9) throw NumericError("negative update weights");
  if (!(sum >= kZeroRowThreshold)) {
    const double u = 1.0 / static_cast<double>(row.size());
    for (double& w : row) w = u;
    return;
  }
  for (double& w : row) w /= sum;
}

struct MstepContext {
  const DecPomdpModel& model;
  const JointPolicy& policy;
  JointPolicyTables tables;
  JointSpace zs, as, ys;
  int nx, nz, na, ny, dim;

  MstepContext(const DecPomdpModel& m, const JointPolicy& p)
      : model(m),
        policy(p),
        tables(expand_joint_policy(m, p)),
        zs(p.memory_space()),
        as(m.action_space()),
        ys(m.observation_space()),
        nx(m.num_states()),
        nz(zs.size()),
        na(as.size()),
        ny(ys.size()),
        dim(m.num_states() * zs.size()) {}
};

}  // namespace

std::vector<std::vector<double>> update_pi(const DecPomdpModel& model, const JointPolicy& policy,
                                           const StateMemoryTable& frequency,
                                           const StateMemoryTable& value) {
  MstepContext c(model, policy);
  if (frequency.dim() != c.dim || value.dim() != c.dim)
    throw std::invalid_argument("E-step tables do not match the joint dimension");

  const ScaledReward scaled = scale_reward(model);
  const std::vector<std::vector<double>> action_kernel = action_conditioned_kernel(model, policy);

  // expected_value[a*dim + src] = Σ_{x',z'} p(x',z'|x,z,a) V(x',z')
  std::vector<double> expected_value(static_cast<size_t>(c.na) * c.dim, 0.0);
  for (int a = 0; a < c.na; ++a)
    kernels::matvec_transpose(action_kernel[a], value.values,
                              std::span<double>(&expected_value[static_cast<size_t>(a) * c.dim],
                                                static_cast<size_t>(c.dim)),
                              c.dim);

  // joint_weight[z*na + a] = π_k(a|z) Σ_x F(x,z) (r̄(x,a) + γ E[V|x,z,a])
  std::vector<double> joint_weight(static_cast<size_t>(c.nz) * c.na, 0.0);
  const int nt = thread_count();
  const bool parallel = static_cast<long>(c.nz) * c.na * c.nx >= (1L << 16);
#pragma omp parallel for num_threads(nt) schedule(static) if (parallel)
  for (int z = 0; z < c.nz; ++z)
    for (int a = 0; a < c.na; ++a) {
      double acc = 0.0;
      for (int x = 0; x < c.nx; ++x) {
        const int src = x * c.nz + z;
        acc += frequency.values[src] *
               (scaled.values[static_cast<size_t>(x) * c.na + a] +
                model.discount * expected_value[static_cast<size_t>(a) * c.dim + src]);
      }
      joint_weight[static_cast<size_t>(z) * c.na + a] =
          c.tables.pi[static_cast<size_t>(z) * c.na + a] * acc;
    }

  // Marginalize the other agents out and normalize per memory state.
  std::vector<std::vector<double>> out(model.num_agents);
  for (int i = 0; i < model.num_agents; ++i) {
    const int nzi = c.zs.component_size(i);
    const int nai = c.as.component_size(i);
    out[i].assign(static_cast<size_t>(nzi) * nai, 0.0);
    for (int z = 0; z < c.nz; ++z)
      for (int a = 0; a < c.na; ++a)
        out[i][static_cast<size_t>(c.zs.component(z, i)) * nai + c.as.component(a, i)] +=
            joint_weight[static_cast<size_t>(z) * c.na + a];
    for (int z = 0; z < nzi; ++z)
      normalize_row({&out[i][static_cast<size_t>(z) * nai], static_cast<size_t>(nai)});
  }
  return out;
}

std::vector<std::vector<double>> update_lambda(const DecPomdpModel& model,
                                               const JointPolicy& policy,
                                               const StateMemoryTable& frequency,
                                               const StateMemoryTable& value) {
  MstepContext c(model, policy);
  if (frequency.dim() != c.dim || value.dim() != c.dim)
    throw std::invalid_argument("E-step tables do not match the joint dimension");

  const std::vector<double> obs_kernel = observation_conditioned_kernel(model, policy);

  // pair_weight[(z*ny + y')*nz + z'] =
  //   λ_k(z'|z,y') Σ_{x,x'} p(x',y'|x,z) F(x,z) V(x',z')
  std::vector<double> pair_weight(static_cast<size_t>(c.nz) * c.ny * c.nz, 0.0);
  const int nt = thread_count();
  const bool parallel = static_cast<long>(c.nz) * c.ny * c.nx * (c.nx + c.nz) >= (1L << 16);
#pragma omp parallel for num_threads(nt) schedule(static) if (parallel)
  for (int z = 0; z < c.nz; ++z)
    for (int y = 0; y < c.ny; ++y) {
      // inner[x'] = Σ_x p(x',y'|x,z) F(x,z)
      std::vector<double> inner(c.nx, 0.0);
      for (int xn = 0; xn < c.nx; ++xn) {
        const double* row = &obs_kernel[(static_cast<size_t>(xn) * c.ny + y) * c.dim];
        double acc = 0.0;
        for (int x = 0; x < c.nx; ++x) acc += row[x * c.nz + z] * frequency.values[x * c.nz + z];
        inner[xn] = acc;
      }
      for (int zn = 0; zn < c.nz; ++zn) {
        double acc = 0.0;
        for (int xn = 0; xn < c.nx; ++xn) acc += inner[xn] * value.values[xn * c.nz + zn];
        pair_weight[(static_cast<size_t>(z) * c.ny + y) * c.nz + zn] =
            c.tables.lambda[(static_cast<size_t>(z) * c.ny + y) * c.nz + zn] * acc;
      }
    }

  std::vector<std::vector<double>> out(model.num_agents);
  for (int i = 0; i < model.num_agents; ++i) {
    const int nzi = c.zs.component_size(i);
    const int nyi = c.ys.component_size(i);
    out[i].assign(static_cast<size_t>(nzi) * nyi * nzi, 0.0);
    for (int z = 0; z < c.nz; ++z)
      for (int y = 0; y < c.ny; ++y)
        for (int zn = 0; zn < c.nz; ++zn)
          out[i][(static_cast<size_t>(c.zs.component(z, i)) * nyi + c.ys.component(y, i)) * nzi +
                 c.zs.component(zn, i)] +=
              pair_weight[(static_cast<size_t>(z) * c.ny + y) * c.nz + zn];
    for (int z = 0; z < nzi; ++z)
      for (int y = 0; y < nyi; ++y)
        normalize_row(std::span<double>(&out[i][(static_cast<size_t>(z) * nyi + y) * nzi],
                                        static_cast<size_t>(nzi)));
  }
  return out;
}

std::vector<std::vector<double>> update_nu(const DecPomdpModel& model, const JointPolicy& policy,
                                           const StateMemoryTable& value) {
  MstepContext c(model, policy);
  if (value.dim() != c.dim)
    throw std::invalid_argument("E-step tables do not match the joint dimension");

  // memory_weight[z] = ν_k(z) Σ_x p0(x) V(x,z)
  std::vector<double> memory_weight(c.nz, 0.0);
  for (int z = 0; z < c.nz; ++z) {
    double acc = 0.0;
    for (int x = 0; x < c.nx; ++x)
      acc += model.initial_state[x] * value.values[static_cast<size_t>(x) * c.nz + z];
    memory_weight[z] = c.tables.nu[z] * acc;
  }

  std::vector<std::vector<double>> out(model.num_agents);
  for (int i = 0; i < model.num_agents; ++i) {
    const int nzi = c.zs.component_size(i);
    out[i].assign(nzi, 0.0);
    for (int z = 0; z < c.nz; ++z) out[i][c.zs.component(z, i)] += memory_weight[z];
    normalize_row(out[i]);
  }
  return out;
}

JointPolicy mstep_update(const DecPomdpModel& model, const JointPolicy& policy,
                         const StateMemoryTable& frequency, const StateMemoryTable& value) {
  JointPolicy next;
  next.memory_sizes = policy.memory_sizes;
  next.pi = update_pi(model, policy, frequency, value);
  next.lambda = update_lambda(model, policy, frequency, value);
  next.nu = update_nu(model, policy, value);
  return next;
}

}  // namespace decpomdp
