#include "decpomdp/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "decpomdp/runtime.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <random>

namespace decpomdp::oracle {

// Everything below walks the model factors with its own per-agent digit
// tuples and strides; none of the kernel/estep index helpers are used, so a
// bug there cannot silently cancel here.

namespace {

bool next_tuple(std::vector<int>& digits, const std::vector<int>& sizes) {
  for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
    if (++digits[i] < sizes[i]) return true;
    digits[i] = 0;
  }
  return false;
}

std::vector<int> strides_of(const std::vector<int>& sizes) {
  std::vector<int> s(sizes.size(), 1);
  for (int i = static_cast<int>(sizes.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * sizes[i + 1];
  return s;
}

int flat_of(const std::vector<int>& digits, const std::vector<int>& strides) {
  int f = 0;
  for (size_t i = 0; i < digits.size(); ++i) f += digits[i] * strides[i];
  return f;
}

int product_of(const std::vector<int>& sizes) {
  int p = 1;
  for (int s : sizes) p *= s;
  return p;
}

struct Shape {
  int nx = 0;
  int agents = 0;
  std::vector<int> memory_sizes, action_sizes, observation_sizes;
  std::vector<int> memory_strides, action_strides, observation_strides;
  int joint_memories = 0, joint_actions = 0, joint_observations = 0;

  Shape(const DecPomdpModel& model, const JointPolicy& policy) {
    nx = static_cast<int>(model.states.size());
    agents = model.num_agents;
    memory_sizes = policy.memory_sizes;
    for (const auto& a : model.actions) action_sizes.push_back(static_cast<int>(a.size()));
    for (const auto& o : model.observations)
      observation_sizes.push_back(static_cast<int>(o.size()));
    memory_strides = strides_of(memory_sizes);
    action_strides = strides_of(action_sizes);
    observation_strides = strides_of(observation_sizes);
    joint_memories = product_of(memory_sizes);
    joint_actions = product_of(action_sizes);
    joint_observations = product_of(observation_sizes);
  }

  double joint_pi(const JointPolicy& p, const std::vector<int>& z,
                  const std::vector<int>& a) const {
    double v = 1.0;
    for (int i = 0; i < agents; ++i) v *= p.pi[i][z[i] * action_sizes[i] + a[i]];
    return v;
  }
  double joint_lambda(const JointPolicy& p, const std::vector<int>& z, const std::vector<int>& y,
                      const std::vector<int>& zn) const {
    double v = 1.0;
    for (int i = 0; i < agents; ++i)
      v *= p.lambda[i][(z[i] * observation_sizes[i] + y[i]) * memory_sizes[i] + zn[i]];
    return v;
  }
  double joint_nu(const JointPolicy& p, const std::vector<int>& z) const {
    double v = 1.0;
    for (int i = 0; i < agents; ++i) v *= p.nu[i][z[i]];
    return v;
  }
};

}  // namespace

AlphaBeta enumerate_alpha_beta(const JointChain& chain, int t) {
  if (t < 0) throw std::invalid_argument("t must be nonnegative");
  const int dim = chain.dim();
  double paths = 1.0;
  for (int u = 0; u <= t; ++u) {
    paths *= dim;
    if (paths > 2e7)
      throw ResourceError("path enumeration infeasible: dim^" + std::to_string(t + 1) +
                          " is too large");
  }

  AlphaBeta out;
  out.alpha.assign(dim, 0.0);
  out.beta.assign(dim, 0.0);

  // Odometer over the t+1 states of a path; probability rebuilt from scratch
  // for every path, deliberately.
  std::vector<int> path(t + 1, 0);
  const std::vector<int> sizes(t + 1, dim);
  do {
    double transition_product = 1.0;
    for (int u = 0; u < t; ++u)
      transition_product *= chain.kernel[static_cast<size_t>(path[u + 1]) * dim + path[u]];
    out.alpha[path[t]] += chain.initial[path[0]] * transition_product;
    out.beta[path[0]] += transition_product * chain.scaled_reward[path[t]];
  } while (next_tuple(path, sizes));

  return out;
}

double enumerate_return(const DecPomdpModel& model, const JointPolicy& policy, int horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  const Shape s(model, policy);
  const double step_cost = static_cast<double>(s.nx) * s.joint_memories * s.joint_actions * s.nx *
                           s.joint_observations * s.joint_memories;
  if (step_cost * (horizon + 1.0) > 1e8)
    throw ResourceError("generative enumeration infeasible for this size and horizon");

  // Joint distribution over (x, memory tuple); memory tuples indexed in
  // odometer order.
  std::vector<double> dist(static_cast<size_t>(s.nx) * s.joint_memories, 0.0);
  {
    std::vector<int> z(s.agents, 0);
    do {
      const int zpos = flat_of(z, s.memory_strides);
      for (int x = 0; x < s.nx; ++x)
        dist[static_cast<size_t>(x) * s.joint_memories + zpos] =
            model.initial_state[x] * s.joint_nu(policy, z);
    } while (next_tuple(z, s.memory_sizes));
  }

  double total = 0.0;
  double discount_pow = 1.0;
  std::vector<double> next(dist.size(), 0.0);
  for (int t = 0;; ++t) {
    double expected_reward = 0.0;
    std::vector<int> z(s.agents, 0);
    do {
      const int zpos = flat_of(z, s.memory_strides);
      for (int x = 0; x < s.nx; ++x) {
        const double mass = dist[static_cast<size_t>(x) * s.joint_memories + zpos];
        if (mass == 0.0) continue;
        std::vector<int> a(s.agents, 0);
        do {
          expected_reward +=
              mass * s.joint_pi(policy, z, a) *
              model.reward[static_cast<size_t>(x) * s.joint_actions + flat_of(a, s.action_strides)];
        } while (next_tuple(a, s.action_sizes));
      }
    } while (next_tuple(z, s.memory_sizes));
    total += discount_pow * expected_reward;

    if (t == horizon) break;
    discount_pow *= model.discount;

    std::fill(next.begin(), next.end(), 0.0);
    std::fill(z.begin(), z.end(), 0);
    do {
      const int zpos = flat_of(z, s.memory_strides);
      for (int x = 0; x < s.nx; ++x) {
        const double mass = dist[static_cast<size_t>(x) * s.joint_memories + zpos];
        if (mass == 0.0) continue;
        std::vector<int> a(s.agents, 0);
        do {
          const double w_action = mass * s.joint_pi(policy, z, a);
          if (w_action == 0.0) continue;
          const int aflat = flat_of(a, s.action_strides);
          for (int xn = 0; xn < s.nx; ++xn) {
            const double w_state =
                w_action *
                model.transition[(static_cast<size_t>(x) * s.joint_actions + aflat) * s.nx + xn];
            if (w_state == 0.0) continue;
            std::vector<int> y(s.agents, 0);
            do {
              const double w_obs =
                  w_state * model.observation_fn[(static_cast<size_t>(xn) * s.joint_actions + aflat) *
                                                     s.joint_observations +
                                                 flat_of(y, s.observation_strides)];
              if (w_obs == 0.0) continue;
              std::vector<int> zn(s.agents, 0);
              do {
                next[static_cast<size_t>(xn) * s.joint_memories + flat_of(zn, s.memory_strides)] +=
                    w_obs * s.joint_lambda(policy, z, y, zn);
              } while (next_tuple(zn, s.memory_sizes));
            } while (next_tuple(y, s.observation_sizes));
          }
        } while (next_tuple(a, s.action_sizes));
      }
    } while (next_tuple(z, s.memory_sizes));
    dist.swap(next);
  }
  return total;
}

namespace {

double path_sum(const DecPomdpModel& model, const JointPolicy& policy, const Shape& s, int t,
                int horizon, int x, const std::vector<int>& z, double weight,
                double discount_pow) {
  double total = 0.0;
  std::vector<int> a(s.agents, 0);
  do {
    const double w_action = weight * s.joint_pi(policy, z, a);
    if (w_action == 0.0) continue;
    const int aflat = flat_of(a, s.action_strides);
    total += w_action * discount_pow *
             model.reward[static_cast<size_t>(x) * s.joint_actions + aflat];
    if (t == horizon) continue;
    for (int xn = 0; xn < s.nx; ++xn) {
      const double w_state =
          w_action * model.transition[(static_cast<size_t>(x) * s.joint_actions + aflat) * s.nx + xn];
      if (w_state == 0.0) continue;
      std::vector<int> y(s.agents, 0);
      do {
        const double w_obs =
            w_state * model.observation_fn[(static_cast<size_t>(xn) * s.joint_actions + aflat) *
                                               s.joint_observations +
                                           flat_of(y, s.observation_strides)];
        if (w_obs == 0.0) continue;
        std::vector<int> zn(s.agents, 0);
        do {
          total += path_sum(model, policy, s, t + 1, horizon, xn, zn,
                            w_obs * s.joint_lambda(policy, z, y, zn),
                            discount_pow * model.discount);
        } while (next_tuple(zn, s.memory_sizes));
      } while (next_tuple(y, s.observation_sizes));
    }
  } while (next_tuple(a, s.action_sizes));
  return total;
}

}  // namespace

double enumerate_return_by_paths(const DecPomdpModel& model, const JointPolicy& policy,
                                 int horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  const Shape s(model, policy);
  const double branch = static_cast<double>(s.joint_actions) * s.nx * s.joint_observations *
                        s.joint_memories;
  // Call count is roughly nx·|Z|·branch^H (geometric sum over depths).
  if (static_cast<double>(s.nx) * s.joint_memories * std::pow(branch, horizon) > 3e7)
    throw ResourceError("literal path enumeration infeasible for this horizon");

  double total = 0.0;
  std::vector<int> z(s.agents, 0);
  do {
    const double w0 = s.joint_nu(policy, z);
    for (int x = 0; x < s.nx; ++x) {
      const double w = model.initial_state[x] * w0;
      if (w != 0.0) total += path_sum(model, policy, s, 0, horizon, x, z, w, 1.0);
    }
  } while (next_tuple(z, s.memory_sizes));
  return total;
}

MonteCarloEstimate monte_carlo_return(const DecPomdpModel& model, const JointPolicy& policy,
                                      int episodes, int horizon, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("need at least one episode");
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  const Shape s(model, policy);

  std::vector<double> returns(episodes, 0.0);
  const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int e = 0; e < episodes; ++e) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(e), 0x9e3779b9u};
    std::mt19937_64 rng(seq);
    auto sample = [&](const double* row, int len) {
      const double u = uniform01(rng());
      double acc = 0.0;
      for (int i = 0; i < len; ++i) {
        acc += row[i];
        if (u < acc) return i;
      }
      return len - 1;
    };

    int x = sample(model.initial_state.data(), s.nx);
    std::vector<int> z(s.agents);
    for (int i = 0; i < s.agents; ++i) z[i] = sample(policy.nu[i].data(), s.memory_sizes[i]);

    double ret = 0.0;
    double discount_pow = 1.0;
    std::vector<int> a(s.agents), y(s.agents);
    for (int t = 0;; ++t) {
      for (int i = 0; i < s.agents; ++i)
        a[i] = sample(&policy.pi[i][static_cast<size_t>(z[i]) * s.action_sizes[i]],
                      s.action_sizes[i]);
      const int aflat = flat_of(a, s.action_strides);
      ret += discount_pow * model.reward[static_cast<size_t>(x) * s.joint_actions + aflat];
      if (t == horizon) break;
      const int xn =
          sample(&model.transition[(static_cast<size_t>(x) * s.joint_actions + aflat) * s.nx],
                 s.nx);
      const int yflat = sample(&model.observation_fn[(static_cast<size_t>(xn) * s.joint_actions +
                                                      aflat) *
                                                     s.joint_observations],
                               s.joint_observations);
      for (int i = 0; i < s.agents; ++i)
        y[i] = (yflat / s.observation_strides[i]) % s.observation_sizes[i];
      for (int i = 0; i < s.agents; ++i)
        z[i] = sample(&policy.lambda[i][(static_cast<size_t>(z[i]) * s.observation_sizes[i] +
                                         y[i]) *
                                        s.memory_sizes[i]],
                      s.memory_sizes[i]);
      x = xn;
      discount_pow *= model.discount;
    }
    returns[e] = ret;
  }

  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= episodes;
  double variance = 0.0;
  for (double r : returns) variance += (r - mean) * (r - mean);
  MonteCarloEstimate out;
  out.mean = mean;
  out.std_error = episodes > 1 ? std::sqrt(variance / (episodes - 1.0) / episodes) : 0.0;
  return out;
}

}  // namespace decpomdp::oracle
