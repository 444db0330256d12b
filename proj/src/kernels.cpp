#include "decpomdp/kernels.hpp"

#include "decpomdp/runtime.hpp"

namespace decpomdp::kernels {

// Both variants of every kernel call the same per-output-element routine, so
// the parallel results match the serial reference bit for bit. Below
// kMinParallelWork flops the parallel entry points run the serial loops:
// desk-scale chains are far too small to amortize a parallel region.

namespace {

constexpr long kMinParallelWork = 1L << 18;

inline double dot_row(std::span<const double> m, std::span<const double> x, int n, int i) {
  const double* row = m.data() + static_cast<size_t>(i) * n;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += row[j] * x[j];
  return acc;
}

inline double dot_col(std::span<const double> m, std::span<const double> x, int n, int j) {
  const double* col = m.data() + j;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += col[static_cast<size_t>(i) * n] * x[i];
  return acc;
}

// One entry of Σ_{y',a} λ(z'|z,y') p(y'|x',a) p(x'|x,a) π(a|z).
inline double joint_kernel_entry(const ChainInputs& in, int xn, int zn, int x, int z) {
  double acc = 0.0;
  for (int a = 0; a < in.na; ++a) {
    const double pa = in.joint_pi[static_cast<size_t>(z) * in.na + a] *
                      in.transition[(static_cast<size_t>(x) * in.na + a) * in.nx + xn];
    if (pa == 0.0) continue;
    const double* obs_row = in.observation.data() + (static_cast<size_t>(xn) * in.na + a) * in.ny;
    double inner = 0.0;
    for (int y = 0; y < in.ny; ++y)
      inner += obs_row[y] * in.joint_lambda[(static_cast<size_t>(z) * in.ny + y) * in.nz + zn];
    acc += pa * inner;
  }
  return acc;
}

// One entry of Σ_{y'} λ(z'|z,y') p(y'|x',a) p(x'|x,a) for a fixed action.
inline double action_kernel_entry(const ChainInputs& in, int a, int xn, int zn, int x, int z) {
  const double px = in.transition[(static_cast<size_t>(x) * in.na + a) * in.nx + xn];
  if (px == 0.0) return 0.0;
  const double* obs_row = in.observation.data() + (static_cast<size_t>(xn) * in.na + a) * in.ny;
  double inner = 0.0;
  for (int y = 0; y < in.ny; ++y)
    inner += obs_row[y] * in.joint_lambda[(static_cast<size_t>(z) * in.ny + y) * in.nz + zn];
  return px * inner;
}

// One entry of Σ_a p(y'|x',a) p(x'|x,a) π(a|z).
inline double observation_kernel_entry(const ChainInputs& in, int xn, int y, int x, int z) {
  double acc = 0.0;
  for (int a = 0; a < in.na; ++a)
    acc += in.observation[(static_cast<size_t>(xn) * in.na + a) * in.ny + y] *
           in.transition[(static_cast<size_t>(x) * in.na + a) * in.nx + xn] *
           in.joint_pi[static_cast<size_t>(z) * in.na + a];
  return acc;
}

}  // namespace

namespace serial {

void matvec(std::span<const double> m, std::span<const double> x, std::span<double> y, int n) {
  for (int i = 0; i < n; ++i) y[i] = dot_row(m, x, n, i);
}

void matvec_transpose(std::span<const double> m, std::span<const double> x, std::span<double> y,
                      int n) {
  for (int j = 0; j < n; ++j) y[j] = dot_col(m, x, n, j);
}

void assemble_joint_kernel(const ChainInputs& in, std::span<double> out) {
  const int dim = in.nx * in.nz;
  for (int dest = 0; dest < dim; ++dest) {
    const int xn = dest / in.nz, zn = dest % in.nz;
    for (int src = 0; src < dim; ++src)
      out[static_cast<size_t>(dest) * dim + src] =
          joint_kernel_entry(in, xn, zn, src / in.nz, src % in.nz);
  }
}

void assemble_action_kernel(const ChainInputs& in, std::span<double> out) {
  const int dim = in.nx * in.nz;
  const size_t per_action = static_cast<size_t>(dim) * dim;
  for (int a = 0; a < in.na; ++a)
    for (int dest = 0; dest < dim; ++dest) {
      const int xn = dest / in.nz, zn = dest % in.nz;
      for (int src = 0; src < dim; ++src)
        out[a * per_action + static_cast<size_t>(dest) * dim + src] =
            action_kernel_entry(in, a, xn, zn, src / in.nz, src % in.nz);
    }
}

void assemble_observation_kernel(const ChainInputs& in, std::span<double> out) {
  const int dim = in.nx * in.nz;
  const int rows = in.nx * in.ny;
  for (int row = 0; row < rows; ++row) {
    const int xn = row / in.ny, y = row % in.ny;
    for (int src = 0; src < dim; ++src)
      out[static_cast<size_t>(row) * dim + src] =
          observation_kernel_entry(in, xn, y, src / in.nz, src % in.nz);
  }
}

}  // namespace serial

void matvec(std::span<const double> m, std::span<const double> x, std::span<double> y, int n) {
  if (static_cast<long>(n) * n < kMinParallelWork) return serial::matvec(m, x, y, n);
  const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int i = 0; i < n; ++i) y[i] = dot_row(m, x, n, i);
}

void matvec_transpose(std::span<const double> m, std::span<const double> x, std::span<double> y,
                      int n) {
  if (static_cast<long>(n) * n < kMinParallelWork) return serial::matvec_transpose(m, x, y, n);
  const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int j = 0; j < n; ++j) y[j] = dot_col(m, x, n, j);
}

void assemble_joint_kernel(const ChainInputs& in, std::span<double> out) {
  const int dim = in.nx * in.nz;
  if (static_cast<long>(dim) * dim * in.na * in.ny < kMinParallelWork)
    return serial::assemble_joint_kernel(in, out);
  const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int dest = 0; dest < dim; ++dest) {
    const int xn = dest / in.nz, zn = dest % in.nz;
    for (int src = 0; src < dim; ++src)
      out[static_cast<size_t>(dest) * dim + src] =
          joint_kernel_entry(in, xn, zn, src / in.nz, src % in.nz);
  }
}

void assemble_action_kernel(const ChainInputs& in, std::span<double> out) {
  const int dim = in.nx * in.nz;
  if (static_cast<long>(dim) * dim * in.na * in.ny < kMinParallelWork)
    return serial::assemble_action_kernel(in, out);
  const size_t per_action = static_cast<size_t>(dim) * dim;
  const int total = in.na * dim;
  const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int t = 0; t < total; ++t) {
    const int a = t / dim, dest = t % dim;
    const int xn = dest / in.nz, zn = dest % in.nz;
    for (int src = 0; src < dim; ++src)
      out[a * per_action + static_cast<size_t>(dest) * dim + src] =
          action_kernel_entry(in, a, xn, zn, src / in.nz, src % in.nz);
  }
}

void assemble_observation_kernel(const ChainInputs& in, std::span<double> out) {
  const int dim = in.nx * in.nz;
  const int rows = in.nx * in.ny;
  if (static_cast<long>(rows) * dim * in.na < kMinParallelWork)
    return serial::assemble_observation_kernel(in, out);
  const int nt = thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int row = 0; row < rows; ++row) {
    const int xn = row / in.ny, y = row % in.ny;
    for (int src = 0; src < dim; ++src)
      out[static_cast<size_t>(row) * dim + src] =
          observation_kernel_entry(in, xn, y, src / in.nz, src % in.nz);
  }
}

}  // namespace decpomdp::kernels
