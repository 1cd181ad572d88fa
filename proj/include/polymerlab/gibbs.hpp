#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polymerlab/potential.hpp"

// Finite-volume chain measures: the energy
//   E_n(x_{n+1}; x_1..x_n) = 1/2 sum_{k=0}^n (x_{k+1} - x_k)^2 + sum_{k=1}^n F_k(x_k)
// with x_0 = 0, its Boltzmann measure rho ~ exp(-beta E_n), exact Gaussian
// sampling at zero potential, MALA sampling otherwise, a brute-force grid
// oracle for n <= 3, and the nested-volume consistency check.

namespace polymerlab {

struct GibbsSpec {
  std::size_t n = 1;
  double beta = 1.0;
  double right_endpoint = 0.0;
  PotentialField potential;
};

double energy(const GibbsSpec& spec, std::span<const double> x);
double energy(const GibbsSpec& spec, std::span<const double> x,
              PotentialEvalContext& ctx);

// gradient_k = dE/dx_k = -(Laplacian x)_k + F'_k(x_k); shares the drift code
// path with the dynamics, so the two agree bitwise.
std::vector<double> energy_gradient(const GibbsSpec& spec,
                                    std::span<const double> x,
                                    PotentialEvalContext& ctx);

// Zero-potential case in closed form: precision beta*A with A tridiagonal
// (2 on the diagonal, -1 off), mean solving A m = (0,..,0,right).
struct GaussianBridge {
  std::size_t n = 1;
  double beta = 1.0;
  double right_endpoint = 0.0;

  std::vector<double> mean() const;  // m_k = k*right/(n+1)
  // (A^{-1})_{kl} = k (n+1-l) / (n+1) for k <= l; covariance is that / beta.
  double covariance(std::size_t k, std::size_t l) const;
};

// A's spectrum along the linear-algebra path (for validation against the
// closed form 2 - 2 cos(m pi/(n+1))), ascending.
std::vector<double> laplacian_matrix_eigenvalues(std::size_t n);

// i.i.d. draws via the tridiagonal Cholesky of beta*A.
std::vector<std::vector<double>> exact_gaussian_sample(const GaussianBridge& bridge,
                                                       std::size_t count,
                                                       std::uint64_t seed);

struct MalaResult {
  std::vector<std::vector<double>> samples;  // post burn-in, thinned
  double acceptance = 0.0;
  bool acceptance_warning = false;  // outside [0.1, 0.9]
  double suggested_h = 0.0;
};

MalaResult mala_sample(const GibbsSpec& spec, std::vector<double> init, double h,
                       std::size_t burn_in, std::size_t count, std::size_t thin,
                       std::uint64_t seed);

struct GridMoments {
  double z = 0.0;                                 // partition function over the box
  std::vector<double> mean;                       // E x_k
  std::vector<std::vector<double>> second;        // E x_k x_l
  double richardson_error = 0.0;                  // vs half resolution
};

// Trapezoidal quadrature of the Boltzmann weight over a box; n <= 3 only.
// Throws if the boundary density exceeds 1e-8 of the maximum (widen the box).
GridMoments grid_oracle(const GibbsSpec& spec, const std::vector<double>& lo,
                        const std::vector<double>& hi, std::size_t resolution);

// Pilot-run box: mean +- width_sd posterior standard deviations per coordinate.
void pilot_box(const GibbsSpec& spec, std::uint64_t seed, double width_sd,
               std::vector<double>& lo, std::vector<double>& hi);

struct DlrReport {
  std::vector<double> ks_stats;  // per inner coordinate
  double ks_critical = 0.0;      // two-sample, 1% level
  double bin_half_width = 0.0;
  std::size_t conditional_hits = 0;
  bool exact_reference = false;  // Gaussian bridge used as the reference law
  bool widened_bin = false;
};

// Samples the outer volume, conditions on coordinate inner_n+1 falling in a
// narrow bin around r, and compares coordinates 1..inner_n against fresh
// samples of the inner-volume measure with endpoint r.
DlrReport dlr_check(const GibbsSpec& outer, std::size_t inner_n, double r,
                    double mala_h, std::size_t min_hits, std::uint64_t seed);

// Two-sample Kolmogorov-Smirnov distance (exposed for tests).
double ks_distance(std::vector<double> a, std::vector<double> b);
double ks_critical_1pct(std::size_t m, std::size_t n);

}  // namespace polymerlab
