// AVX2 variants of the inner-loop kernels.  Compiled with -mavx2 (see
// CMakeLists); everything here mirrors the scalar reference operation by
// operation so results are bitwise identical lane for lane.  No FMA: the
// scalar path has none, and mixed rounding would break the equivalence.

#include "polymerlab/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace polymerlab::kernels {
namespace {

inline __m256d lap4(__m256d xm1, __m256d xc, __m256d xp1) {
  const __m256d two = _mm256_set1_pd(2.0);
  return _mm256_add_pd(_mm256_sub_pd(xm1, _mm256_mul_pd(two, xc)), xp1);
}

// Scalar tails reuse exactly the reference arithmetic.
inline double lap1(double xm1, double xc, double xp1) {
  return (xm1 - 2.0 * xc) + xp1;
}

void laplacian_avx2(std::span<const double> x, double right,
                    std::span<double> out) {
  const std::size_t n = x.size();
  if (n == 0) return;
  out[0] = lap1(0.0, x[0], n > 1 ? x[1] : right);
  std::size_t k = 1;
  if (n >= 2) {
    for (; k + 4 < n; k += 4) {
      const __m256d xm1 = _mm256_loadu_pd(&x[k - 1]);
      const __m256d xc = _mm256_loadu_pd(&x[k]);
      const __m256d xp1 = _mm256_loadu_pd(&x[k + 1]);
      _mm256_storeu_pd(&out[k], lap4(xm1, xc, xp1));
    }
    for (; k + 1 < n; ++k) out[k] = lap1(x[k - 1], x[k], x[k + 1]);
    out[n - 1] = lap1(x[n - 2], x[n - 1], right);
  }
}

inline __m256d em4(__m256d xm1, __m256d xc, __m256d xp1, __m256d f, __m256d dw,
                   __m256d dt, __m256d sigma) {
  const __m256d lap = lap4(xm1, xc, xp1);
  const __m256d e = _mm256_add_pd(xc, _mm256_mul_pd(dt, _mm256_add_pd(lap, f)));
  return _mm256_add_pd(e, _mm256_mul_pd(sigma, dw));
}

inline double em1(double xm1, double xc, double xp1, double f, double dw,
                  double dt, double sigma) {
  const double lap = (xm1 - 2.0 * xc) + xp1;
  const double e = xc + dt * (lap + f);
  return e + sigma * dw;
}

void em_step_avx2(std::span<const double> x, double right,
                  std::span<const double> f, std::span<const double> dw,
                  double dt, double sigma, std::span<double> out) {
  const std::size_t n = x.size();
  if (n == 0) return;
  out[0] = em1(0.0, x[0], n > 1 ? x[1] : right, f[0], dw[0], dt, sigma);
  std::size_t k = 1;
  if (n >= 2) {
    const __m256d vdt = _mm256_set1_pd(dt);
    const __m256d vsig = _mm256_set1_pd(sigma);
    for (; k + 4 < n; k += 4) {
      const __m256d xm1 = _mm256_loadu_pd(&x[k - 1]);
      const __m256d xc = _mm256_loadu_pd(&x[k]);
      const __m256d xp1 = _mm256_loadu_pd(&x[k + 1]);
      const __m256d vf = _mm256_loadu_pd(&f[k]);
      const __m256d vdw = _mm256_loadu_pd(&dw[k]);
      _mm256_storeu_pd(&out[k], em4(xm1, xc, xp1, vf, vdw, vdt, vsig));
    }
    for (; k + 1 < n; ++k)
      out[k] = em1(x[k - 1], x[k], x[k + 1], f[k], dw[k], dt, sigma);
    out[n - 1] = em1(x[n - 2], x[n - 1], right, f[n - 1], dw[n - 1], dt, sigma);
  }
}

void heat_step_avx2(std::span<const double> x, double right, double dt,
                    std::span<double> out) {
  const std::size_t n = x.size();
  if (n == 0) return;
  out[0] = x[0] + dt * lap1(0.0, x[0], n > 1 ? x[1] : right);
  std::size_t k = 1;
  if (n >= 2) {
    const __m256d vdt = _mm256_set1_pd(dt);
    for (; k + 4 < n; k += 4) {
      const __m256d xm1 = _mm256_loadu_pd(&x[k - 1]);
      const __m256d xc = _mm256_loadu_pd(&x[k]);
      const __m256d xp1 = _mm256_loadu_pd(&x[k + 1]);
      const __m256d r = _mm256_add_pd(xc, _mm256_mul_pd(vdt, lap4(xm1, xc, xp1)));
      _mm256_storeu_pd(&out[k], r);
    }
    for (; k + 1 < n; ++k) out[k] = x[k] + dt * lap1(x[k - 1], x[k], x[k + 1]);
    out[n - 1] = x[n - 1] + dt * lap1(x[n - 2], x[n - 1], right);
  }
}

double sup_abs_weighted_avx2(std::span<const double> x,
                             std::span<const double> w) {
  const std::size_t n = x.size();
  const __m256d absmask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d vm = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vx = _mm256_and_pd(_mm256_loadu_pd(&x[k]), absmask);
    const __m256d vw = _mm256_loadu_pd(&w[k]);
    vm = _mm256_max_pd(vm, _mm256_mul_pd(vx, vw));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vm);
  double m = lanes[0];
  for (int i = 1; i < 4; ++i)
    if (lanes[i] > m) m = lanes[i];
  for (; k < n; ++k) {
    const double v = std::fabs(x[k]) * w[k];
    if (v > m) m = v;
  }
  return m;
}

double min_diff_avx2(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d vm = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(&a[k]), _mm256_loadu_pd(&b[k]));
    vm = _mm256_min_pd(vm, d);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vm);
  double m = lanes[0];
  for (int i = 1; i < 4; ++i)
    if (lanes[i] < m) m = lanes[i];
  for (; k < n; ++k) {
    const double d = a[k] - b[k];
    if (d < m) m = d;
  }
  return m;
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend b{"avx2",      laplacian_avx2, em_step_avx2,
                         heat_step_avx2, sup_abs_weighted_avx2, min_diff_avx2};
  return b;
}

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

}  // namespace polymerlab::kernels

#endif  // x86_64
