#include "polymerlab/kernels/kernels.hpp"

#include <cmath>
#include <limits>

namespace polymerlab::kernels {
namespace {

void laplacian_scalar(std::span<const double> x, double right,
                      std::span<double> out) {
  const std::size_t n = x.size();
  if (n == 0) return;
  if (n == 1) {
    out[0] = (0.0 - 2.0 * x[0]) + right;
    return;
  }
  out[0] = (0.0 - 2.0 * x[0]) + x[1];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    out[k] = (x[k - 1] - 2.0 * x[k]) + x[k + 1];
  }
  out[n - 1] = (x[n - 2] - 2.0 * x[n - 1]) + right;
}

inline double em_update(double xm1, double xc, double xp1, double f, double dw,
                        double dt, double sigma) {
  const double lap = (xm1 - 2.0 * xc) + xp1;
  const double e = xc + dt * (lap + f);
  return e + sigma * dw;
}

void em_step_scalar(std::span<const double> x, double right,
                    std::span<const double> f, std::span<const double> dw,
                    double dt, double sigma, std::span<double> out) {
  const std::size_t n = x.size();
  if (n == 0) return;
  if (n == 1) {
    out[0] = em_update(0.0, x[0], right, f[0], dw[0], dt, sigma);
    return;
  }
  out[0] = em_update(0.0, x[0], x[1], f[0], dw[0], dt, sigma);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    out[k] = em_update(x[k - 1], x[k], x[k + 1], f[k], dw[k], dt, sigma);
  }
  out[n - 1] = em_update(x[n - 2], x[n - 1], right, f[n - 1], dw[n - 1], dt, sigma);
}

inline double heat_update(double xm1, double xc, double xp1, double dt) {
  const double lap = (xm1 - 2.0 * xc) + xp1;
  return xc + dt * lap;
}

void heat_step_scalar(std::span<const double> x, double right, double dt,
                      std::span<double> out) {
  const std::size_t n = x.size();
  if (n == 0) return;
  if (n == 1) {
    out[0] = heat_update(0.0, x[0], right, dt);
    return;
  }
  out[0] = heat_update(0.0, x[0], x[1], dt);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    out[k] = heat_update(x[k - 1], x[k], x[k + 1], dt);
  }
  out[n - 1] = heat_update(x[n - 2], x[n - 1], right, dt);
}

double sup_abs_weighted_scalar(std::span<const double> x,
                               std::span<const double> w) {
  double m = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = std::fabs(x[k]) * w[k];
    if (v > m) m = v;
  }
  return m;
}

double min_diff_scalar(std::span<const double> a, std::span<const double> b) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    if (d < m) m = d;
  }
  return m;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend b{"scalar",   laplacian_scalar, em_step_scalar,
                         heat_step_scalar, sup_abs_weighted_scalar,
                         min_diff_scalar};
  return b;
}

}  // namespace polymerlab::kernels
