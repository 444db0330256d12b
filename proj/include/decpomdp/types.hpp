#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace decpomdp {

/// Parse failure in a model or policy document. `line` is 1-based; 0 means
/// the error is not tied to a single line (e.g. a missing section).
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Numerical failure (non-finite values, linear solver residual too large).
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A configured resource cap was exceeded (iteration caps, table sizes).
class ResourceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat mixed-radix index over a tuple of finite per-agent sets.
/// Agent 0 is the most significant digit, so for two agents with sizes
/// (s0, s1) the tuple (i, j) maps to i*s1 + j.
class JointSpace {
 public:
  JointSpace() = default;
  explicit JointSpace(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    strides_.assign(sizes_.size(), 1);
    for (int i = static_cast<int>(sizes_.size()) - 2; i >= 0; --i)
      strides_[i] = strides_[i + 1] * sizes_[i + 1];
    size_ = sizes_.empty() ? 1 : strides_[0] * sizes_[0];
  }

  int size() const { return size_; }
  int num_components() const { return static_cast<int>(sizes_.size()); }
  int component_size(int i) const { return sizes_[i]; }

  int flatten(std::span<const int> parts) const {
    int f = 0;
    for (size_t i = 0; i < sizes_.size(); ++i) f += parts[i] * strides_[i];
    return f;
  }

  int component(int flat, int i) const { return (flat / strides_[i]) % sizes_[i]; }

  void unflatten(int flat, std::span<int> parts) const {
    for (size_t i = 0; i < sizes_.size(); ++i) parts[i] = component(flat, static_cast<int>(i));
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> strides_;
  int size_ = 1;
};

/// Problem instance: environment dynamics, observation model, reward and
/// discount, plus the per-agent action/observation label sets.
///
/// Table layouts (all row-major, joint actions/observations flattened with
/// JointSpace over the per-agent sets):
///   transition[(x*|A| + a)*|X| + x']   = p(x' | x, a)
///   observation_fn[(x'*|A| + a)*|Y| + y] = p(y | x', a)  (a is the previous
///                                          joint action, x' the new state)
///   reward[x*|A| + a]                  = r(x, a)
struct DecPomdpModel {
  int num_agents = 0;
  std::vector<std::string> states;
  std::vector<std::vector<std::string>> actions;       // [agent][action]
  std::vector<std::vector<std::string>> observations;  // [agent][observation]
  std::vector<double> initial_state;
  std::vector<double> transition;
  std::vector<double> observation_fn;
  std::vector<double> reward;
  double discount = 0.0;

  int num_states() const { return static_cast<int>(states.size()); }

  JointSpace action_space() const {
    std::vector<int> s;
    s.reserve(actions.size());
    for (const auto& a : actions) s.push_back(static_cast<int>(a.size()));
    return JointSpace(std::move(s));
  }

  JointSpace observation_space() const {
    std::vector<int> s;
    s.reserve(observations.size());
    for (const auto& o : observations) s.push_back(static_cast<int>(o.size()));
    return JointSpace(std::move(s));
  }

  int num_joint_actions() const { return action_space().size(); }
  int num_joint_observations() const { return observation_space().size(); }

  double transition_at(int x, int a, int xn) const {
    return transition[(static_cast<size_t>(x) * num_joint_actions() + a) * num_states() + xn];
  }
  double observation_at(int xn, int a, int y) const {
    return observation_fn[(static_cast<size_t>(xn) * num_joint_actions() + a) *
                              num_joint_observations() +
                          y];
  }
  double reward_at(int x, int a) const {
    return reward[static_cast<size_t>(x) * num_joint_actions() + a];
  }
};

/// Finite-state-controller policy θ = (π, λ, ν), stored per agent.
///
///   pi[i][z*|A_i| + a]              = π^i(a | z)
///   lambda[i][(z*|Y_i| + y)*|Z_i| + z'] = λ^i(z' | z, y)
///   nu[i][z]                        = ν^i(z)
struct JointPolicy {
  std::vector<int> memory_sizes;
  std::vector<std::vector<double>> pi;
  std::vector<std::vector<double>> lambda;
  std::vector<std::vector<double>> nu;

  int num_agents() const { return static_cast<int>(memory_sizes.size()); }

  JointSpace memory_space() const { return JointSpace(memory_sizes); }
};

enum class InitScheme { kUniform, kRandom };

}  // namespace decpomdp
