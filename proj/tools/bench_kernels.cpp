// Times the OpenMP kernels against the serial reference on synthetic chains
// of growing size and checks that both produce identical bits.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "decpomdp/kernels.hpp"
#include "decpomdp/runtime.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(int repeats, const auto& fn) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count() / repeats;
}

std::vector<double> random_stochastic(std::mt19937_64& rng, int rows, int cols) {
  std::vector<double> m(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < cols; ++j) {
      m[static_cast<size_t>(i) * cols + j] = decpomdp::uniform01(rng());
      sum += m[static_cast<size_t>(i) * cols + j];
    }
    for (int j = 0; j < cols; ++j) m[static_cast<size_t>(i) * cols + j] /= sum;
  }
  return m;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", decpomdp::thread_count());
  std::printf("%-22s %8s %12s %12s %9s %10s\n", "kernel", "n", "serial_ms", "omp_ms", "speedup",
              "identical");

  std::mt19937_64 rng(20240917);
  for (int n : {128, 256, 512, 1024}) {
    const int nz = 4, ny = 4, na = 4;
    const int nx = n / nz;
    decpomdp::kernels::ChainInputs in;
    std::vector<double> transition = random_stochastic(rng, nx * na, nx);
    std::vector<double> observation = random_stochastic(rng, nx * na, ny);
    std::vector<double> joint_pi = random_stochastic(rng, nz, na);
    std::vector<double> joint_lambda = random_stochastic(rng, nz * ny, nz);
    in.transition = transition;
    in.observation = observation;
    in.joint_pi = joint_pi;
    in.joint_lambda = joint_lambda;
    in.nx = nx;
    in.nz = nz;
    in.na = na;
    in.ny = ny;

    std::vector<double> kernel_serial(static_cast<size_t>(n) * n), kernel_omp(kernel_serial);
    const int assemble_reps = n >= 1024 ? 2 : 5;
    const double assemble_serial = time_ms(
        assemble_reps, [&] { decpomdp::kernels::serial::assemble_joint_kernel(in, kernel_serial); });
    const double assemble_omp =
        time_ms(assemble_reps, [&] { decpomdp::kernels::assemble_joint_kernel(in, kernel_omp); });
    bool same = kernel_serial == kernel_omp;
    std::printf("%-22s %8d %12.3f %12.3f %8.2fx %10s\n", "assemble_joint_kernel", n,
                assemble_serial, assemble_omp, assemble_serial / assemble_omp,
                same ? "yes" : "NO");

    std::vector<double> x(n), y_serial(n), y_omp(n);
    for (int i = 0; i < n; ++i) x[i] = decpomdp::uniform01(rng());
    const int reps = 200;
    const double mv_serial =
        time_ms(reps, [&] { decpomdp::kernels::serial::matvec(kernel_serial, x, y_serial, n); });
    const double mv_omp = time_ms(reps, [&] { decpomdp::kernels::matvec(kernel_omp, x, y_omp, n); });
    same = y_serial == y_omp;
    std::printf("%-22s %8d %12.3f %12.3f %8.2fx %10s\n", "matvec", n, mv_serial, mv_omp,
                mv_serial / mv_omp, same ? "yes" : "NO");

    const double mvt_serial = time_ms(
        reps, [&] { decpomdp::kernels::serial::matvec_transpose(kernel_serial, x, y_serial, n); });
    const double mvt_omp =
        time_ms(reps, [&] { decpomdp::kernels::matvec_transpose(kernel_omp, x, y_omp, n); });
    same = y_serial == y_omp;
    std::printf("%-22s %8d %12.3f %12.3f %8.2fx %10s\n", "matvec_transpose", n, mvt_serial,
                mvt_omp, mvt_serial / mvt_omp, same ? "yes" : "NO");
  }
  return 0;
}
