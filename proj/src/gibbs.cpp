#include "polymerlab/gibbs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polymerlab/kernels/kernels.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {
namespace {

PolymerState as_state(const GibbsSpec& spec, std::span<const double> x) {
  PolymerState s;
  s.coords.assign(x.begin(), x.end());
  s.right_boundary = spec.right_endpoint;
  return s;
}

}  // namespace

double energy(const GibbsSpec& spec, std::span<const double> x,
              PotentialEvalContext& ctx) {
  if (x.size() != spec.n) throw std::invalid_argument("energy: wrong length");
  double kinetic = 0.0;
  double prev = 0.0;  // x_0
  for (std::size_t k = 0; k < spec.n; ++k) {
    const double d = x[k] - prev;
    kinetic += d * d;
    prev = x[k];
  }
  const double dlast = spec.right_endpoint - prev;
  kinetic = 0.5 * (kinetic + dlast * dlast);
  double pot = 0.0;
  if (spec.potential.kind != PotentialKind::zero)
    for (std::size_t k = 1; k <= spec.n; ++k)
      pot += ctx.eval(k, x[k - 1]).value;
  return kinetic + pot;
}

double energy(const GibbsSpec& spec, std::span<const double> x) {
  PotentialEvalContext ctx(spec.potential);
  return energy(spec, x, ctx);
}

std::vector<double> energy_gradient(const GibbsSpec& spec,
                                    std::span<const double> x,
                                    PotentialEvalContext& ctx) {
  if (x.size() != spec.n) throw std::invalid_argument("gradient: wrong length");
  const PolymerState s = as_state(spec, x);
  std::vector<double> g = drift(ctx, s);
  for (double& v : g) v = -v;
  return g;
}

std::vector<double> GaussianBridge::mean() const {
  std::vector<double> m(n);
  for (std::size_t k = 1; k <= n; ++k)
    m[k - 1] = static_cast<double>(k) * right_endpoint / static_cast<double>(n + 1);
  return m;
}

double GaussianBridge::covariance(std::size_t k, std::size_t l) const {
  if (k > l) std::swap(k, l);
  const double np1 = static_cast<double>(n + 1);
  return static_cast<double>(k) * (np1 - static_cast<double>(l)) / (np1 * beta);
}

std::vector<double> laplacian_matrix_eigenvalues(std::size_t n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 2.0;
    if (i + 1 < n) {
      a(i, i + 1) = -1.0;
      a(i + 1, i) = -1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = es.eigenvalues()(i);
  return ev;
}

std::vector<std::vector<double>> exact_gaussian_sample(const GaussianBridge& bridge,
                                                       std::size_t count,
                                                       std::uint64_t seed) {
  const std::size_t n = bridge.n;
  // Cholesky of beta*A: lower bidiagonal with diag d, subdiag e.
  std::vector<double> d(n), e(n, 0.0);
  d[0] = std::sqrt(2.0 * bridge.beta);
  for (std::size_t k = 1; k < n; ++k) {
    e[k] = -bridge.beta / d[k - 1];
    d[k] = std::sqrt(2.0 * bridge.beta - e[k] * e[k]);
  }
  const std::vector<double> m = bridge.mean();
  std::vector<std::vector<double>> out(count);
  rng::Stream st(seed, rng::Domain::sampler, 0);
  std::vector<double> z(n);
  for (auto& sample : out) {
    for (auto& v : z) v = st.next_normal();
    // Solve L^T x = z backwards: cov(x) = (L L^T)^{-1} = (beta A)^{-1}.
    sample.resize(n);
    sample[n - 1] = z[n - 1] / d[n - 1];
    for (std::size_t k = n - 1; k-- > 0;)
      sample[k] = (z[k] - e[k + 1] * sample[k + 1]) / d[k];
    for (std::size_t k = 0; k < n; ++k) sample[k] += m[k];
  }
  return out;
}

MalaResult mala_sample(const GibbsSpec& spec, std::vector<double> init, double h,
                       std::size_t burn_in, std::size_t count, std::size_t thin,
                       std::uint64_t seed) {
  if (!(h > 0.0)) throw std::invalid_argument("mala: h must be positive");
  if (init.size() != spec.n) throw std::invalid_argument("mala: bad init length");
  thin = std::max<std::size_t>(1, thin);

  PotentialEvalContext ctx(spec.potential);
  const double half_h2_beta = 0.5 * h * h * spec.beta;

  std::vector<double> x = std::move(init);
  double ex = energy(spec, x, ctx);
  std::vector<double> gx = energy_gradient(spec, x, ctx);

  rng::Stream st(seed, rng::Domain::sampler, 1);
  std::vector<double> y(spec.n), gy;
  std::size_t accepted = 0, proposed = 0;

  MalaResult res;
  res.samples.reserve(count);
  const std::size_t total = burn_in + count * thin;
  for (std::size_t it = 0; it < total; ++it) {
    double fwd = 0.0;  // -|y - x + (h^2/2) beta grad(x)|^2 / (2 h^2)
    for (std::size_t k = 0; k < spec.n; ++k) {
      const double xi = st.next_normal();
      y[k] = x[k] - half_h2_beta * gx[k] + h * xi;
      fwd += xi * xi;
    }
    fwd *= -0.5;
    const double ey = energy(spec, y, ctx);
    gy = energy_gradient(spec, y, ctx);
    double bwd = 0.0;
    for (std::size_t k = 0; k < spec.n; ++k) {
      const double r = (x[k] - y[k] + half_h2_beta * gy[k]) / h;
      bwd += r * r;
    }
    bwd *= -0.5;
    const double log_alpha = -spec.beta * (ey - ex) + bwd - fwd;
    ++proposed;
    if (log_alpha >= 0.0 || std::log(st.next_u01()) < log_alpha) {
      x.swap(y);
      ex = ey;
      gx.swap(gy);
      ++accepted;
    }
    if (it >= burn_in && (it - burn_in + 1) % thin == 0)
      res.samples.push_back(x);
  }
  res.acceptance = proposed ? static_cast<double>(accepted) / proposed : 0.0;
  res.acceptance_warning = res.acceptance < 0.1 || res.acceptance > 0.9;
  res.suggested_h = res.acceptance < 0.1 ? h * 0.5
                    : res.acceptance > 0.9 ? h * 2.0
                                           : h;
  return res;
}

GridMoments grid_oracle(const GibbsSpec& spec, const std::vector<double>& lo,
                        const std::vector<double>& hi, std::size_t resolution) {
  const std::size_t n = spec.n;
  if (n > 3) throw std::invalid_argument("grid_oracle: n <= 3 only (cost guard)");
  if (lo.size() != n || hi.size() != n)
    throw std::invalid_argument("grid_oracle: bad box");
  if (resolution < 5) throw std::invalid_argument("grid_oracle: resolution too low");

  PotentialEvalContext ctx(spec.potential);

  auto sweep = [&](std::size_t res, GridMoments& gm, double& max_density,
                   double& max_boundary) {
    gm.mean.assign(n, 0.0);
    gm.second.assign(n, std::vector<double>(n, 0.0));
    gm.z = 0.0;
    max_density = 0.0;
    max_boundary = 0.0;
    std::vector<double> step(n), x(n);
    for (std::size_t k = 0; k < n; ++k)
      step[k] = (hi[k] - lo[k]) / static_cast<double>(res - 1);
    std::vector<std::size_t> idx(n, 0);
    double cell = 1.0;
    for (std::size_t k = 0; k < n; ++k) cell *= step[k];
    while (true) {
      double wgt = cell;
      bool boundary = false;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = lo[k] + step[k] * static_cast<double>(idx[k]);
        if (idx[k] == 0 || idx[k] == res - 1) {
          wgt *= 0.5;
          boundary = true;
        }
      }
      const double density = std::exp(-spec.beta * energy(spec, x, ctx));
      max_density = std::max(max_density, density);
      if (boundary) max_boundary = std::max(max_boundary, density);
      const double w = wgt * density;
      gm.z += w;
      for (std::size_t k = 0; k < n; ++k) {
        gm.mean[k] += w * x[k];
        for (std::size_t l = k; l < n; ++l) gm.second[k][l] += w * x[k] * x[l];
      }
      std::size_t k = 0;
      while (k < n && ++idx[k] == res) idx[k++] = 0;
      if (k == n) break;
    }
    for (std::size_t k = 0; k < n; ++k) {
      gm.mean[k] /= gm.z;
      for (std::size_t l = k; l < n; ++l) {
        gm.second[k][l] /= gm.z;
        gm.second[l][k] = gm.second[k][l];
      }
    }
  };

  GridMoments full, half;
  double max_density = 0.0, max_boundary = 0.0;
  sweep(resolution, full, max_density, max_boundary);
  if (max_boundary > 1e-8 * max_density)
    throw std::invalid_argument("grid_oracle: box too small, widen it");
  double md2, mb2;
  sweep(resolution / 2, half, md2, mb2);
  double err = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    err = std::max(err, std::fabs(full.mean[k] - half.mean[k]));
    for (std::size_t l = k; l < n; ++l)
      err = std::max(err, std::fabs(full.second[k][l] - half.second[k][l]));
  }
  full.richardson_error = err;
  return full;
}

void pilot_box(const GibbsSpec& spec, std::uint64_t seed, double width_sd,
               std::vector<double>& lo, std::vector<double>& hi) {
  // Start the pilot at the zero-potential bridge mean.
  GaussianBridge bridge{spec.n, spec.beta, spec.right_endpoint};
  auto res = mala_sample(spec, bridge.mean(), 0.5 / std::sqrt(spec.beta), 500,
                         1500, 1, seed);
  lo.assign(spec.n, 0.0);
  hi.assign(spec.n, 0.0);
  for (std::size_t k = 0; k < spec.n; ++k) {
    double m = 0.0, m2 = 0.0;
    for (const auto& s : res.samples) {
      m += s[k];
      m2 += s[k] * s[k];
    }
    m /= static_cast<double>(res.samples.size());
    m2 = m2 / static_cast<double>(res.samples.size()) - m * m;
    const double sd = std::sqrt(std::max(m2, 1e-12));
    lo[k] = m - width_sd * sd;
    hi[k] = m + width_sd * sd;
  }
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_1pct(std::size_t m, std::size_t n) {
  const double c = 1.628;  // K-S inverse at alpha = 0.01
  return c * std::sqrt(static_cast<double>(m + n) /
                       (static_cast<double>(m) * static_cast<double>(n)));
}

DlrReport dlr_check(const GibbsSpec& outer, std::size_t inner_n, double r,
                    double mala_h, std::size_t min_hits, std::uint64_t seed) {
  if (inner_n >= outer.n)
    throw std::invalid_argument("dlr_check: need inner_n < outer_n");
  if (outer.n > 8) throw std::invalid_argument("dlr_check: outer_n capped at 8");

  DlrReport rep;

  // Outer chain.  Thinning keeps both sample sets close enough to i.i.d.
  // for the KS critical value to apply.
  GaussianBridge outer_bridge{outer.n, outer.beta, outer.right_endpoint};
  const std::size_t thin = 25;
  const std::size_t want = min_hits;
  std::vector<std::vector<double>> conditional;
  double bin_half = 0.025;
  // Draw in batches, widening the bin only if the hit rate is hopeless.
  std::vector<std::vector<double>> pool;
  std::size_t batch = want * 20;
  for (int round = 0; round < 6 && conditional.size() < want; ++round) {
    auto res = mala_sample(outer, outer_bridge.mean(), mala_h, 2000, batch, thin,
                           seed + static_cast<std::uint64_t>(round));
    for (auto& s : res.samples) pool.push_back(std::move(s));
    conditional.clear();
    for (const auto& s : pool)
      if (std::fabs(s[inner_n] - r) <= bin_half) {
        conditional.emplace_back(s.begin(), s.begin() + inner_n);
      }
    if (conditional.size() < want && round >= 2) {
      bin_half *= 1.5;
      rep.widened_bin = true;
    }
  }
  rep.bin_half_width = bin_half;
  rep.conditional_hits = conditional.size();

  // Reference law: exact bridge at zero potential, fresh MALA otherwise.
  GibbsSpec inner = outer;
  inner.n = inner_n;
  inner.right_endpoint = r;
  std::vector<std::vector<double>> reference;
  if (outer.potential.kind == PotentialKind::zero) {
    rep.exact_reference = true;
    GaussianBridge ib{inner_n, outer.beta, r};
    reference = exact_gaussian_sample(ib, std::max(conditional.size(), want),
                                      seed ^ 0xabcdefull);
  } else {
    GaussianBridge ib{inner_n, outer.beta, r};
    auto res = mala_sample(inner, ib.mean(), mala_h, 2000,
                           std::max(conditional.size(), want), thin,
                           seed ^ 0xabcdefull);
    reference = std::move(res.samples);
  }

  rep.ks_critical = ks_critical_1pct(conditional.size(), reference.size());
  rep.ks_stats.resize(inner_n, 0.0);
  for (std::size_t k = 0; k < inner_n; ++k) {
    std::vector<double> a(conditional.size()), b(reference.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = conditional[i][k];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = reference[i][k];
    rep.ks_stats[k] = ks_distance(std::move(a), std::move(b));
  }
  return rep;
}

}  // namespace polymerlab
