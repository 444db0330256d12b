#pragma once

#include <span>

namespace decpomdp::kernels {

// Dense inner loops shared by the chain assembly and the E-step. The
// unqualified functions run the loops OpenMP-parallel over output elements;
// the serial:: twins are the plain reference used by the consistency tests
// and the benchmark. Each output element is produced by exactly one thread
// with the same inner summation order as the reference, so the two variants
// are bit-identical for any thread count.

/// y = M x for a dense row-major n×n matrix.
void matvec(std::span<const double> m, std::span<const double> x, std::span<double> y, int n);

/// y = Mᵀ x.
void matvec_transpose(std::span<const double> m, std::span<const double> x, std::span<double> y,
                      int n);

/// Inputs for assembling p(x',z'|x,z) and its conditioned variants.
/// joint_pi / joint_lambda are the expanded joint policy tables.
struct ChainInputs {
  std::span<const double> transition;      // [(x*na + a)*nx + x']
  std::span<const double> observation;     // [(x'*na + a)*ny + y']
  std::span<const double> joint_pi;        // [z*na + a]
  std::span<const double> joint_lambda;    // [(z*ny + y')*nz + z']
  int nx = 0;
  int nz = 0;
  int na = 0;
  int ny = 0;
};

/// out[dest*dim + src] = Σ_{y',a} λ(z'|z,y') p(y'|x',a) p(x'|x,a) π(a|z).
void assemble_joint_kernel(const ChainInputs& in, std::span<double> out);

/// out[a][dest*dim + src] = Σ_{y'} λ(z'|z,y') p(y'|x',a) p(x'|x,a);
/// `out` holds na consecutive dim×dim tables.
void assemble_action_kernel(const ChainInputs& in, std::span<double> out);

/// out[(x'*ny + y')*dim + src] = Σ_a p(y'|x',a) p(x'|x,a) π(a|z).
void assemble_observation_kernel(const ChainInputs& in, std::span<double> out);

namespace serial {
void matvec(std::span<const double> m, std::span<const double> x, std::span<double> y, int n);
void matvec_transpose(std::span<const double> m, std::span<const double> x, std::span<double> y,
                      int n);
void assemble_joint_kernel(const ChainInputs& in, std::span<double> out);
void assemble_action_kernel(const ChainInputs& in, std::span<double> out);
void assemble_observation_kernel(const ChainInputs& in, std::span<double> out);
}  // namespace serial

}  // namespace decpomdp::kernels
