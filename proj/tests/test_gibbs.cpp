#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "polymerlab/dynamics.hpp"
#include "polymerlab/gibbs.hpp"
#include "polymerlab/rng.hpp"

using namespace polymerlab;

TEST_CASE("energy examples") {
  GibbsSpec spec{1, 1.0, 1.0, PotentialField::zero_field()};
  std::vector<double> x1 = {0.0};
  CHECK(energy(spec, x1) == 0.5);  // single link 1/2 * 1^2

  GibbsSpec spec2{2, 1.0, 3.0, PotentialField::zero_field()};
  std::vector<double> x2 = {1.0, 2.0};
  CHECK(energy(spec2, x2) == 1.5);  // three unit links

  GibbsSpec spec0{4, 1.0, 0.0, PotentialField::zero_field()};
  std::vector<double> zeros(4, 0.0);
  CHECK(energy(spec0, zeros) == 0.0);
}

TEST_CASE("energy gradient equals minus the dynamics drift, bitwise") {
  const auto F = PotentialField::shot(88, 1.0, 1.0, 1.0);
  GibbsSpec spec{12, 1.0, 2.0, F};
  rng::Stream s(3, rng::Domain::experiment, 20);
  std::vector<double> x(12);
  for (auto& v : x) v = 4.0 * (s.next_u01() - 0.5);

  PotentialEvalContext ctx(F);
  const auto grad = energy_gradient(spec, x, ctx);

  PolymerState st;
  st.coords = x;
  st.right_boundary = spec.right_endpoint;
  const auto d = drift(F, st);
  for (std::size_t k = 0; k < 12; ++k) CHECK(grad[k] == -d[k]);
}

TEST_CASE("energy gradient matches finite differences of the energy") {
  const auto F = PotentialField::shot(1234, 0.8, 1.2, 0.9);
  GibbsSpec spec{6, 1.0, -1.0, F};
  PotentialEvalContext ctx(F);
  rng::Stream s(17, rng::Domain::experiment, 21);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(6);
    for (auto& v : x) v = 6.0 * (s.next_u01() - 0.5);
    const auto grad = energy_gradient(spec, x, ctx);
    for (std::size_t k = 0; k < 6; ++k) {
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (energy(spec, xp, ctx) - energy(spec, xm, ctx)) / (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("bridge mean solves A m = (0,..,0,right)") {
  GaussianBridge b{8, 1.0, 2.7};
  const auto m = b.mean();
  for (std::size_t k = 1; k <= 8; ++k) {
    const double left = k >= 2 ? m[k - 2] : 0.0;
    const double right = k <= 7 ? m[k] : 0.0;
    const double am = -left + 2.0 * m[k - 1] - right;
    const double expect = (k == 8) ? 2.7 : 0.0;
    CHECK(am == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("laplacian matrix eigenvalues match the closed form") {
  for (std::size_t n : {4, 8, 16}) {
    const auto ev = laplacian_matrix_eigenvalues(n);
    REQUIRE(ev.size() == n);
    for (std::size_t m = 1; m <= n; ++m) {
      const double expect =
          2.0 - 2.0 * std::cos(double(m) * std::numbers::pi / double(n + 1));
      CHECK(std::fabs(ev[m - 1] - expect) < 1e-10);
    }
  }
}

TEST_CASE("explicit inverse of A") {
  // (A^{-1})_{kl} = k (n+1-l)/(n+1) for k <= l: check A * A^{-1} = I at n = 8
  const std::size_t n = 8;
  GaussianBridge b{n, 1.0, 0.0};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      double acc = 0.0;
      // row i of A times column j of A^{-1}
      for (std::size_t l = 1; l <= n; ++l) {
        double a_il = 0.0;
        if (l == i) a_il = 2.0;
        else if (l + 1 == i || l == i + 1) a_il = -1.0;
        acc += a_il * b.covariance(l, j);
      }
      CHECK(std::fabs(acc - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("exact gaussian sampling reproduces mean and covariance") {
  GaussianBridge b{8, 1.0, 4.5};
  const std::size_t count = 200000;
  const auto samples = exact_gaussian_sample(b, count, 99);
  const auto m = b.mean();
  std::vector<double> mean(8, 0.0);
  for (const auto& s : samples)
    for (std::size_t k = 0; k < 8; ++k) mean[k] += s[k];
  for (auto& v : mean) v /= double(count);
  for (std::size_t k = 0; k < 8; ++k)
    CHECK(std::fabs(mean[k] - m[k]) < 4.0 * std::sqrt(b.covariance(k + 1, k + 1) / count));

  for (std::size_t k = 0; k < 8; k += 3) {
    for (std::size_t l = k; l < 8; l += 2) {
      double acc = 0.0;
      for (const auto& s : samples) acc += (s[k] - m[k]) * (s[l] - m[l]);
      acc /= double(count);
      const double expect = b.covariance(k + 1, l + 1);
      CHECK(acc == doctest::Approx(expect).epsilon(0.03));
    }
  }
}

TEST_CASE("n = 1 zero-potential variance is 1/(2 beta)") {
  for (double beta : {1.0, 2.5}) {
    GaussianBridge b{1, beta, 0.0};
    CHECK(b.covariance(1, 1) == doctest::Approx(0.5 / beta));
    const auto samples = exact_gaussian_sample(b, 100000, 5);
    double s2 = 0.0;
    for (const auto& s : samples) s2 += s[0] * s[0];
    CHECK(s2 / 100000 == doctest::Approx(0.5 / beta).epsilon(0.03));
  }
}

TEST_CASE("mala matches the exact gaussian at zero potential") {
  GibbsSpec spec{8, 1.0, 0.0, PotentialField::zero_field()};
  GaussianBridge b{8, 1.0, 0.0};
  const auto res = mala_sample(spec, b.mean(), 0.45, 2000, 40000, 2, 31337);
  CHECK(res.acceptance > 0.3);
  CHECK(res.acceptance < 0.99);

  const std::size_t nsamp = res.samples.size();
  for (std::size_t k = 0; k < 8; k += 2) {
    double m = 0.0, v = 0.0;
    for (const auto& s : res.samples) m += s[k];
    m /= double(nsamp);
    for (const auto& s : res.samples) v += (s[k] - m) * (s[k] - m);
    v /= double(nsamp);
    const double truth = b.covariance(k + 1, k + 1);
    // correlated samples: use a generous 4-sigma-ish gate with tau ~ 20
    CHECK(std::fabs(m) < 4.0 * std::sqrt(truth * 20.0 / double(nsamp)));
    CHECK(v == doctest::Approx(truth).epsilon(0.08));
  }
}

TEST_CASE("grid oracle gaussian cases") {
  // n = 1: Var = 1/(2 beta), quadrature to 1e-6
  GibbsSpec s1{1, 1.0, 0.0, PotentialField::zero_field()};
  const auto g1 = grid_oracle(s1, {-6.0}, {6.0}, 801);
  CHECK(std::fabs(g1.mean[0]) < 1e-9);
  CHECK(std::fabs(g1.second[0][0] - 0.5) < 1e-6);
  CHECK(g1.richardson_error < 1e-4);

  // n = 2: covariance = (1/beta) [[2/3, 1/3], [1/3, 2/3]]
  GibbsSpec s2{2, 1.0, 0.0, PotentialField::zero_field()};
  const auto g2 = grid_oracle(s2, {-6.0, -6.0}, {6.0, 6.0}, 301);
  CHECK(std::fabs(g2.second[0][0] - 2.0 / 3.0) < 1e-5);
  CHECK(std::fabs(g2.second[1][1] - 2.0 / 3.0) < 1e-5);
  CHECK(std::fabs(g2.second[0][1] - 1.0 / 3.0) < 1e-5);
}

TEST_CASE("grid oracle respects symmetry and guards") {
  // symmetric trig potential with zero endpoint: mean must vanish.
  // cos modes only would break symmetry; instead exploit F(x) even in x by
  // using the zero potential and a symmetric box (already covered), so here
  // check the guards instead.
  GibbsSpec big{4, 1.0, 0.0, PotentialField::zero_field()};
  CHECK_THROWS_AS(grid_oracle(big, {-1, -1, -1, -1}, {1, 1, 1, 1}, 41),
                  std::invalid_argument);
  GibbsSpec s1{1, 1.0, 0.0, PotentialField::zero_field()};
  CHECK_THROWS_AS(grid_oracle(s1, {-0.5}, {0.5}, 41), std::invalid_argument);
}

TEST_CASE("grid oracle halves its richardson error under refinement") {
  const auto F = PotentialField::shot(2222, 0.7, 1.0, 1.0);
  GibbsSpec spec{2, 1.0, 0.5, F};
  std::vector<double> lo, hi;
  pilot_box(spec, 9, 8.0, lo, hi);
  const auto coarse = grid_oracle(spec, lo, hi, 81);
  const auto fine = grid_oracle(spec, lo, hi, 161);
  CHECK(fine.richardson_error < coarse.richardson_error);
  CHECK(std::fabs(fine.mean[0] - coarse.mean[0]) < 5.0 * coarse.richardson_error + 1e-9);
}

TEST_CASE("mala matches the grid oracle in a random potential") {
  const auto F = PotentialField::shot(4242, 0.8, 1.0, 1.0);
  GibbsSpec spec{2, 1.0, 0.3, F};
  std::vector<double> lo, hi;
  pilot_box(spec, 31, 8.0, lo, hi);
  const auto oracle = grid_oracle(spec, lo, hi, 201);

  GaussianBridge b{2, 1.0, 0.3};
  const auto res = mala_sample(spec, b.mean(), 0.5, 4000, 60000, 3, 808);
  double m1 = 0, m2 = 0, q1 = 0, q2 = 0;
  for (const auto& s : res.samples) {
    m1 += s[0];
    m2 += s[1];
    q1 += s[0] * s[0];
    q2 += s[1] * s[1];
  }
  const double nn = double(res.samples.size());
  m1 /= nn;
  m2 /= nn;
  q1 /= nn;
  q2 /= nn;
  // 3 SE with an autocorrelation allowance (tau ~ 10 after thinning)
  const double se1 = std::sqrt((q1 - m1 * m1) * 10.0 / nn);
  const double se2 = std::sqrt((q2 - m2 * m2) * 10.0 / nn);
  CHECK(std::fabs(m1 - oracle.mean[0]) < 3.0 * se1 + 3.0 * oracle.richardson_error);
  CHECK(std::fabs(m2 - oracle.mean[1]) < 3.0 * se2 + 3.0 * oracle.richardson_error);
  CHECK(std::fabs(q1 - oracle.second[0][0]) <
        3.0 * 3.0 * se1 + 3.0 * oracle.richardson_error + 0.02);
  CHECK(std::fabs(q2 - oracle.second[1][1]) <
        3.0 * 3.0 * se2 + 3.0 * oracle.richardson_error + 0.02);
}

TEST_CASE("ks distance and critical value") {
  std::vector<double> a, b;
  rng::Stream s(1, rng::Domain::experiment, 30);
  for (int i = 0; i < 4000; ++i) {
    a.push_back(s.next_normal());
    b.push_back(s.next_normal());
  }
  const double d = ks_distance(a, b);
  CHECK(d < ks_critical_1pct(a.size(), b.size()));
  for (auto& v : b) v += 1.0;  // gross shift must be detected
  CHECK(ks_distance(a, b) > ks_critical_1pct(a.size(), b.size()));
}

TEST_CASE("dlr consistency at zero potential against the exact bridge") {
  GibbsSpec outer{4, 1.0, 1.0, PotentialField::zero_field()};
  const auto rep = dlr_check(outer, 2, 0.5, 0.5, 2000, 77);
  REQUIRE(rep.ks_stats.size() == 2);
  CHECK(rep.exact_reference);
  CHECK(rep.conditional_hits >= 2000);
  for (double d : rep.ks_stats) CHECK(d < rep.ks_critical);
}

TEST_CASE("dlr consistency in a shot-noise potential") {
  const auto F = PotentialField::shot(5151, 0.8, 1.0, 1.0);
  GibbsSpec outer{4, 1.0, 0.5, F};
  const auto rep = dlr_check(outer, 2, 0.3, 0.5, 2000, 13);
  REQUIRE(rep.ks_stats.size() == 2);
  CHECK(!rep.exact_reference);
  for (double d : rep.ks_stats) CHECK(d < rep.ks_critical);
}
