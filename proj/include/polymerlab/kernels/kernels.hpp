#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

// Inner-loop kernels for the chain dynamics.  Scalar versions are the
// reference semantics; SIMD variants are selected at runtime and must produce
// bitwise identical results (all operations are elementwise or exact
// max/min reductions, and the build disables FP contraction).
//
// Boundary convention everywhere: x holds coordinates x_1..x_n, the origin
// x_0 = 0 is implicit, x_{n+1} = right.

namespace polymerlab::kernels {

struct Backend {
  const char* name;

  // out_k = (x_{k-1} - 2 x_k) + x_{k+1}
  void (*laplacian)(std::span<const double> x, double right,
                    std::span<double> out);

  // out_k = [x_k + dt*(lap_k + f_k)] + sigma*dw_k, lap as above (fused)
  void (*em_step)(std::span<const double> x, double right,
                  std::span<const double> f, std::span<const double> dw,
                  double dt, double sigma, std::span<double> out);

  // out_k = x_k + dt*lap_k
  void (*heat_step)(std::span<const double> x, double right, double dt,
                    std::span<double> out);

  // max_k |x_k| * w_k  (0 for empty input)
  double (*sup_abs_weighted)(std::span<const double> x,
                             std::span<const double> w);

  // min_k (a_k - b_k)  (+inf for empty input)
  double (*min_diff)(std::span<const double> a, std::span<const double> b);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
bool avx2_supported();
#endif

// Active backend: chosen once per process.  POLYMERLAB_KERNELS=scalar|avx2
// overrides the CPU-feature default; select() exists for tests.
const Backend& active();
void select(std::string_view name);
std::string active_name();

}  // namespace polymerlab::kernels
