#include "polymerlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

#include "polymerlab/dynamics.hpp"
#include "polymerlab/gibbs.hpp"
#include "polymerlab/kernels/kernels.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// small statistics helpers

struct RunningStat {
  std::size_t n = 0;
  double mean = 0.0, m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double sd() const { return std::sqrt(variance()); }
  double se() const { return n > 0 ? sd() / std::sqrt(double(n)) : 0.0; }
};

// Standard error of the mean of a correlated series via batch means.
double batch_se(const std::vector<double>& series, std::size_t batches = 64) {
  if (series.size() < 2 * batches) batches = std::max<std::size_t>(2, series.size() / 2);
  const std::size_t len = series.size() / batches;
  RunningStat bs;
  for (std::size_t b = 0; b < batches; ++b) {
    double m = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) m += series[i];
    bs.add(m / double(len));
  }
  return bs.se();
}

// Effective sample size of a correlated series (batch-means estimate).
double effective_samples(const std::vector<double>& series) {
  RunningStat all;
  for (double x : series) all.add(x);
  const double se = batch_se(series);
  if (se <= 0.0) return double(series.size());
  const double var = all.variance();
  return var > 0.0 ? var / (se * se) : double(series.size());
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, slope_se = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = double(n) * sxx - sx * sx;
  LineFit f;
  f.slope = (double(n) * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / double(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - f.intercept - f.slope * xs[i];
    rss += r * r;
  }
  if (n > 2)
    f.slope_se = std::sqrt(rss / double(n - 2) * double(n) / denom);
  return f;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double frac = pos - double(i);
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

// ---------------------------------------------------------------------------
// harness plumbing

std::size_t worker_count() {
  if (const char* env = std::getenv("POLYMERLAB_WORKERS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

// Fan a per-seed job out over the worker pool.  Jobs write only into their
// own slot, so reduction order (and therefore the report) is deterministic.
template <typename Fn>
void for_each_seed(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

ExperimentReport new_report(const RunConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  rep.config_json = cfg.canonical_json;
  rep.config_digest = cfg.digest;
  rep.seeds = cfg.seeds;
  return rep;
}

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

void write_csv(const std::string& file, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(file);
  out << header << "\n";
  char buf[32];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
}

std::uint64_t seed_of(const RunConfig& cfg, std::size_t index) {
  return cfg.noise_seed + cfg.seeds[index];
}

double sup_distance_ll(const PolymerState& a, const PolymerState& b) {
  double m = 0.0;
  for (std::size_t k = 1; k <= a.n(); ++k)
    m = std::max(m, std::fabs(a.coords[k - 1] - b.coords[k - 1]) / double(k));
  return m;
}

double sup_distance(const PolymerState& a, const PolymerState& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.n(); ++k)
    m = std::max(m, std::fabs(a.coords[k] - b.coords[k]));
  return m;
}

PolymerState perturbed_ray(double slope, double offset, std::size_t n,
                           double amplitude, std::uint64_t seed,
                           std::uint64_t stream_row) {
  rng::Stream s(seed, rng::Domain::experiment, stream_row);
  PolymerState x = Ray{slope, offset}.materialize(n);
  for (auto& v : x.coords) v += amplitude * (2.0 * s.next_u01() - 1.0);
  return x;
}

// ---------------------------------------------------------------------------
// exp_heat_flow_suite: ray stationarity, convexity preservation, monotone
// growth for convex data, and the finite ordering time of an offset ray.

ExperimentReport exp_heat_flow_suite(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params, {"slopes", "ray_tol", "det_n"}, "params");
  const std::vector<double> slopes =
      cfg.params.value("slopes", std::vector<double>{-1.0, 0.5, 2.0});
  const double ray_tol = cfg.params.value("ray_tol", 1e-10);
  const std::size_t det_n = cfg.params.value("det_n", std::size_t{24});

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;
  const double dt = cfg.sde.dt;
  const double t_end = cfg.sde.t_end;

  // ray stationarity across snapshots
  double ray_err = 0.0;
  for (double u : slopes) {
    SdeConfig sc = cfg.sde;
    sc.sigma_override = 0.0;
    const NoisePath silent(0, dt);
    const auto traj =
        evolve(Ray{u, 0.0}.materialize(n), PotentialField::zero_field(), silent, sc);
    for (const auto& st : traj.states)
      for (std::size_t k = 1; k <= n; ++k)
        ray_err = std::max(ray_err, std::fabs(st.coords[k - 1] - u * double(k)));
  }
  rep.metrics["ray_error_max"] = Metric::exact(ray_err);

  // convexity: random convex data stays convex, and grows monotonically
  double convexity_min = 0.0;
  double monotone_min = 0.0;
  {
    rng::Stream s(cfg.noise_seed + 1, rng::Domain::experiment, 40);
    PolymerState x;
    x.coords.resize(n);
    double slope = -2.0, val = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      val += slope;
      x.coords[k] = val;
      slope += s.next_u01() * 4.0 / double(n);
    }
    x.right_boundary = val + slope;
    PolymerState prev = x;
    for (int i = 1; i <= 8; ++i) {
      const auto cur = heat_flow(x, t_end * i / 8.0, dt);
      for (double v : discrete_laplacian(cur))
        convexity_min = std::min(convexity_min, v);
      const double gap = kernels::active().min_diff(cur.coords, prev.coords);
      monotone_min = std::min(monotone_min, gap);
      prev = cur;
    }
  }
  rep.metrics["convexity_min"] = Metric::exact(convexity_min);
  rep.metrics["monotone_growth_min"] = Metric::exact(monotone_min);

  // finite ordering time for r^a - b (strict positivity after finite T)
  double t_order = -1.0;
  {
    const auto x0 = Ray{1.0, -2.0}.materialize(det_n);
    for (double T = 1.0; T <= 4096.0; T *= 2.0) {
      const auto st = heat_flow(x0, T, 0.25, Scheme::semi_implicit_laplacian);
      bool positive = true;
      for (double c : st.coords) positive = positive && c > 0.0;
      if (positive) {
        t_order = T;
        break;
      }
    }
  }
  rep.metrics["ordering_time"] = Metric::exact(t_order);

  // kinetic energy decay along the flow
  double energy_increase = 0.0;
  {
    rng::Stream s(cfg.noise_seed + 2, rng::Domain::experiment, 41);
    PolymerState x;
    x.coords.resize(n);
    for (auto& v : x.coords) v = 2.0 * s.next_u01() - 1.0;
    x.right_boundary = 0.0;
    GibbsSpec spec{n, 1.0, 0.0, PotentialField::zero_field()};
    double prev = energy(spec, x.coords);
    PolymerState cur = x;
    for (int i = 0; i < 10; ++i) {
      cur = heat_flow(cur, t_end / 10.0, dt);
      const double e = energy(spec, cur.coords);
      energy_increase = std::max(energy_increase, e - prev);
      prev = e;
    }
  }
  rep.metrics["energy_increase_max"] = Metric::exact(energy_increase);

  const bool pass = ray_err <= ray_tol && convexity_min >= -1e-12 &&
                    monotone_min >= -1e-12 && t_order > 0.0 &&
                    energy_increase <= 1e-12;
  rep.verdict = pass ? Verdict::pass : Verdict::fail;
  rep.verdict_rule =
      "ray_error_max <= " + std::to_string(ray_tol) +
      "; convexity_min >= -1e-12; monotone_growth_min >= -1e-12; "
      "ordering_time finite; energy_increase_max <= 1e-12";
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_monotonicity: order preservation for N pairs under shared noise, with a
// deliberately unstable step size as the negative control.

ExperimentReport exp_monotonicity(const RunConfig& cfg) {
  reject_unknown_keys(
      cfg.params,
      {"epsilon", "gap_scale", "touch_fraction", "control_dt", "control_pairs"},
      "params");
  const double eps = cfg.params.value("epsilon", 1e-12);
  const double gap_scale = cfg.params.value("gap_scale", 1.0);
  const double touch_fraction = cfg.params.value("touch_fraction", 0.25);
  const double control_dt = cfg.params.value("control_dt", 0.6);
  const std::size_t control_pairs = cfg.params.value("control_pairs", std::size_t{8});

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;

  auto make_pair = [&](std::uint64_t seed, PolymerState& x0, PolymerState& y0) {
    rng::Stream s(seed, rng::Domain::experiment, 50);
    const double slope = 2.0 * s.next_u01() - 1.0;
    x0 = Ray{slope, 0.0}.materialize(n);
    for (auto& v : x0.coords) v += 2.0 * s.next_u01() - 1.0;
    y0 = x0;
    for (std::size_t k = 0; k < n; ++k) {
      // adversarial: a fraction of the coordinates touch exactly
      if (s.next_u01() < touch_fraction) continue;
      y0.coords[k] += gap_scale * s.next_u01();
    }
    y0.right_boundary = x0.right_boundary + gap_scale * s.next_u01();
  };

  // count order violations along the full trajectory of a pair
  auto run_pair = [&](std::uint64_t seed, const SdeConfig& sc,
                      double t_end) -> std::size_t {
    PolymerState x0, y0;
    make_pair(seed, x0, y0);
    NoisePath path(seed, sc.dt);
    SdeConfig c = sc;
    c.t_end = t_end;
    c.snapshot_stride = sc.dt;  // every step
    std::size_t violations = 0;
    try {
      const auto tx = evolve(x0, cfg.potential, path, c);
      const auto ty = evolve(y0, cfg.potential, path, c);
      for (std::size_t i = 0; i < tx.states.size(); ++i)
        if (!partial_order_leq(tx.states[i], ty.states[i], eps)) ++violations;
    } catch (const IntegrationError&) {
      ++violations;  // blow-up counts as a broken comparison
    }
    return violations;
  };

  std::vector<double> violations(cfg.seeds.size(), 0.0);
  for_each_seed(cfg.seeds.size(), [&](std::size_t i) {
    violations[i] = double(run_pair(seed_of(cfg, i), cfg.sde, cfg.sde.t_end));
  });
  double total = 0.0;
  for (double v : violations) total += v;
  rep.per_seed["violations"] = violations;
  rep.metrics["pairs"] = Metric::exact(double(cfg.seeds.size()));
  rep.metrics["order_violations"] = Metric::exact(total);

  // negative control: dt violating dt (2 + L_f) <= 1
  SdeConfig control = cfg.sde;
  control.dt = control_dt;
  control.enforce_step_condition = false;
  const double control_t = control_dt * 16.0;
  double control_violations = 0.0;
  for (std::size_t i = 0; i < control_pairs; ++i)
    control_violations += double(run_pair(seed_of(cfg, i % cfg.seeds.size()),
                                          control, control_t));
  rep.metrics["control_violations"] = Metric::exact(control_violations);

  rep.verdict = (total == 0.0 && control_violations > 0.0) ? Verdict::pass
                                                            : Verdict::fail;
  rep.verdict_rule = "order_violations == 0 at eps = " + std::to_string(eps) +
                     " and control_violations > 0 at dt = " +
                     std::to_string(control_dt);
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_slope_invariance: tail slope estimates of rays-plus-perturbations stay
// put; the (v-, v+) bracket may not widen much.

ExperimentReport exp_slope_invariance(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params,
                      {"slopes", "perturbation", "tail_fraction", "drift_tol",
                       "bracket_growth_tol", "wide_bracket"},
                      "params");
  const std::vector<double> slopes =
      cfg.params.value("slopes", std::vector<double>{-1.0, 0.0, 1.0});
  const double perturbation = cfg.params.value("perturbation", 1.0);
  const double tail_fraction = cfg.params.value("tail_fraction", 0.5);
  const double drift_tol = cfg.params.value("drift_tol", 0.05);
  const double growth_tol = cfg.params.value("bracket_growth_tol", 0.1);
  const double wide_bracket = cfg.params.value("wide_bracket", 0.1);

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;

  const std::size_t jobs = cfg.seeds.size() * slopes.size();
  std::vector<double> drift(jobs, 0.0), growth(jobs, 0.0), width_end(jobs, 0.0);
  for_each_seed(jobs, [&](std::size_t job) {
    const std::size_t si = job / slopes.size();
    const double v = slopes[job % slopes.size()];
    const std::uint64_t seed = seed_of(cfg, si);
    const auto x0 = perturbed_ray(v, 0.0, n, perturbation, seed, 60);
    NoisePath path(seed, cfg.sde.dt);
    const auto est0 = estimate_slope(x0, tail_fraction);
    const auto xf = evolve_final(x0, cfg.potential, path, cfg.sde);
    const auto est1 = estimate_slope(xf, tail_fraction);
    drift[job] = std::fabs(est1.slope - est0.slope);
    growth[job] = est1.bracket_width() - est0.bracket_width();
    width_end[job] = est1.bracket_width();
  });

  double max_drift = 0.0, max_growth = 0.0, max_width = 0.0;
  for (std::size_t i = 0; i < jobs; ++i) {
    max_drift = std::max(max_drift, drift[i]);
    max_growth = std::max(max_growth, growth[i]);
    max_width = std::max(max_width, width_end[i]);
  }
  rep.per_seed["slope_drift"] = drift;
  rep.per_seed["bracket_growth"] = growth;
  rep.metrics["max_slope_drift"] = Metric::exact(max_drift);
  rep.metrics["max_bracket_growth"] = Metric::exact(max_growth);
  rep.metrics["max_bracket_width"] = Metric::exact(max_width);

  if (max_width > wide_bracket) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back(
        "bracket too wide to certify the slope surrogate at this n");
  } else {
    rep.verdict = (max_drift <= drift_tol && max_growth <= growth_tol)
                      ? Verdict::pass
                      : Verdict::fail;
  }
  rep.verdict_rule = "max_slope_drift <= " + std::to_string(drift_tol) +
                     " and max_bracket_growth <= " + std::to_string(growth_tol) +
                     "; inconclusive if bracket width > " +
                     std::to_string(wide_bracket);
  rep.notes.push_back("slope class membership is the finite-n slope surrogate");
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_shear_equivariance: Phi(Xi^v x, Xi^v F) = Xi^v Phi(x, F), with the
// deliberately unsheared potential as the negative control.

ExperimentReport exp_shear_equivariance(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params, {"v", "tolerance", "control_min"}, "params");
  const double v_pinned = cfg.params.value("v", 0.7);
  const double tol = cfg.params.value("tolerance", 1e-8);
  const double control_min = cfg.params.value("control_min", 1e-4);

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;

  std::vector<double> discrepancy(cfg.seeds.size(), 0.0);
  for_each_seed(cfg.seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = seed_of(cfg, i);
    rng::Stream s(seed, rng::Domain::experiment, 70);
    const double v = (i == 0) ? v_pinned : 2.0 * s.next_u01() - 1.0;
    const auto x0 = perturbed_ray(0.2, -1.0, n, 1.0, seed, 71);
    NoisePath path(seed, cfg.sde.dt);
    const auto lhs =
        evolve_final(shear(x0, v), shear_potential(cfg.potential, v), path, cfg.sde);
    const auto rhs = shear(evolve_final(x0, cfg.potential, path, cfg.sde), v);
    discrepancy[i] = sup_distance(lhs, rhs);
  });
  double max_disc = 0.0;
  for (double d : discrepancy) max_disc = std::max(max_disc, d);
  rep.per_seed["discrepancy"] = discrepancy;
  rep.metrics["max_discrepancy"] = Metric::exact(max_disc);
  rep.metrics["v_pinned"] = Metric::exact(v_pinned);

  // negative control: transform the chain but not the potential
  double control_disc = 0.0;
  {
    const std::uint64_t seed = seed_of(cfg, 0);
    const auto x0 = perturbed_ray(0.2, -1.0, n, 1.0, seed, 71);
    NoisePath path(seed, cfg.sde.dt);
    const auto lhs = evolve_final(shear(x0, v_pinned), cfg.potential, path, cfg.sde);
    const auto rhs = shear(evolve_final(x0, cfg.potential, path, cfg.sde), v_pinned);
    control_disc = sup_distance(lhs, rhs);
  }
  rep.metrics["control_discrepancy"] = Metric::exact(control_disc);

  const bool pass = max_disc <= tol && control_disc > control_min;
  rep.verdict = pass ? Verdict::pass : Verdict::fail;
  rep.verdict_rule = "max_discrepancy <= " + std::to_string(tol) +
                     " and control_discrepancy > " + std::to_string(control_min);
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_gibbs_invariance: Gibbs-initialized ensembles keep their moments under
// the flow.  Zero potential compares against the closed-form bridge; a random
// potential at n <= 3 compares occupation moments against the grid oracle.

ExperimentReport exp_gibbs_invariance(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params,
                      {"trajectories", "cov_rel_tol", "eigen_tol", "pool_stride",
                       "mixing_t_end", "oracle_resolution", "min_ess",
                       "run_control", "control_trajectories"},
                      "params");
  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;
  const double beta = cfg.sde.beta();

  if (cfg.potential.kind == PotentialKind::zero) {
    const std::size_t n_traj = cfg.params.value("trajectories", std::size_t{20000});
    const double cov_rel_tol = cfg.params.value("cov_rel_tol", 0.05);
    const double eigen_tol = cfg.params.value("eigen_tol", 1e-10);
    const double pool_stride = cfg.params.value("pool_stride", 1.0);
    const bool run_control = cfg.params.value("run_control", true);

    // eigenvalues of A along the linear-algebra path vs the closed form
    double eig_err = 0.0;
    {
      const auto ev = laplacian_matrix_eigenvalues(n);
      for (std::size_t m = 1; m <= n; ++m)
        eig_err = std::max(
            eig_err, std::fabs(ev[m - 1] - (2.0 - 2.0 * std::cos(double(m) *
                                                                 std::numbers::pi /
                                                                 double(n + 1)))));
    }
    rep.metrics["eigenvalue_error"] = Metric::exact(eig_err);

    GaussianBridge bridge{n, beta, 0.0};

    auto ensemble_cov_error = [&](std::size_t count, const SdeConfig& sde,
                                  double& max_rel, double& max_mean_z) {
      // pooled second-moment accumulation over snapshots t in (0, t_end]
      const std::size_t workers = std::min<std::size_t>(worker_count(), 8);
      struct Acc {
        std::vector<double> sum, cross;
        std::size_t count = 0;
      };
      std::vector<Acc> accs(workers);
      for (auto& a : accs) {
        a.sum.assign(n, 0.0);
        a.cross.assign(n * n, 0.0);
      }
      std::atomic<std::size_t> next{0};
      auto work = [&](std::size_t w) {
        Acc& acc = accs[w];
        SdeConfig sc = sde;
        sc.snapshot_stride = pool_stride;
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          const std::uint64_t seed = cfg.noise_seed + 1000 + i;
          const auto init =
              exact_gaussian_sample(bridge, 1, seed ^ 0xfeedf00dull)[0];
          PolymerState x0;
          x0.coords = init;
          x0.right_boundary = 0.0;
          NoisePath path(seed, sc.dt);
          const auto traj = evolve(x0, cfg.potential, path, sc);
          for (std::size_t s = 1; s < traj.states.size(); ++s) {
            const auto& xs = traj.states[s].coords;
            ++acc.count;
            for (std::size_t a = 0; a < n; ++a) {
              acc.sum[a] += xs[a];
              for (std::size_t b = a; b < n; ++b)
                acc.cross[a * n + b] += xs[a] * xs[b];
            }
          }
        }
      };
      if (workers <= 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
      }
      std::vector<double> sum(n, 0.0), cross(n * n, 0.0);
      std::size_t total = 0;
      for (const auto& a : accs) {
        total += a.count;
        for (std::size_t i = 0; i < n; ++i) sum[i] += a.sum[i];
        for (std::size_t i = 0; i < n * n; ++i) cross[i] += a.cross[i];
      }
      max_rel = 0.0;
      max_mean_z = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double mean_a = sum[a] / double(total);
        const double sd_a = std::sqrt(bridge.covariance(a + 1, a + 1));
        max_mean_z = std::max(
            max_mean_z, std::fabs(mean_a) / (sd_a / std::sqrt(double(total))));
        for (std::size_t b = a; b < n; ++b) {
          const double mean_b = sum[b] / double(total);
          const double c =
              cross[a * n + b] / double(total) - mean_a * mean_b;
          const double truth = bridge.covariance(a + 1, b + 1);
          max_rel = std::max(max_rel, std::fabs(c - truth) / truth);
        }
      }
      return total;
    };

    double max_rel = 0.0, max_mean_z = 0.0;
    const std::size_t pooled =
        ensemble_cov_error(n_traj, cfg.sde, max_rel, max_mean_z);
    rep.metrics["pooled_states"] = Metric::exact(double(pooled));
    rep.metrics["cov_max_rel_error"] = Metric::exact(max_rel);
    rep.metrics["mean_max_z"] = Metric::exact(max_mean_z);

    // negative control: sigma^2 != 2/beta must push the covariance off
    double control_rel = 0.0;
    if (run_control) {
      const std::size_t m =
          cfg.params.value("control_trajectories", std::size_t{4000});
      SdeConfig sc = cfg.sde;
      sc.sigma_override = 1.0;  // sigma^2 = 1 instead of 2/beta = 2
      double cz = 0.0;
      ensemble_cov_error(m, sc, control_rel, cz);
      rep.metrics["control_cov_rel_error"] = Metric::exact(control_rel);
    }

    const bool pass = max_rel <= cov_rel_tol && eig_err <= eigen_tol &&
                      max_mean_z <= 5.0 &&
                      (!run_control || control_rel > 3.0 * cov_rel_tol);
    rep.verdict = pass ? Verdict::pass : Verdict::fail;
    rep.verdict_rule =
        "cov_max_rel_error <= " + std::to_string(cov_rel_tol) +
        "; eigenvalue_error <= " + std::to_string(eigen_tol) +
        "; mean_max_z <= 5; control covariance clearly off";
    rep.notes.push_back(
        "covariance truth is (1/beta) A^{-1} with A^{-1}_{kl} = k(n+1-l)/(n+1)");
  } else {
    // random potential: occupation moments of one long trajectory vs oracle
    if (n > 3)
      throw ConfigError(
          "exp_gibbs_invariance with a random potential needs n <= 3 (oracle)");
    const double min_ess = cfg.params.value("min_ess", 1e4);
    const std::size_t resolution =
        cfg.params.value("oracle_resolution", std::size_t{201});

    GibbsSpec spec{n, beta, 0.0, cfg.potential};
    std::vector<double> lo, hi;
    pilot_box(spec, cfg.noise_seed ^ 0x9999ull, 8.0, lo, hi);
    const auto oracle = grid_oracle(spec, lo, hi, resolution);

    // burn in from the bridge, then accumulate marginal moments per step
    GaussianBridge bridge{n, beta, 0.0};
    PolymerState x0;
    x0.coords = bridge.mean();
    x0.right_boundary = 0.0;
    NoisePath path(cfg.noise_seed, cfg.sde.dt);
    SdeConfig burn = cfg.sde;
    burn.t_end = 100.0;
    const auto burned = evolve_final(x0, cfg.potential, path, burn);

    const std::int64_t steps = path.steps(cfg.sde.t_end);
    std::vector<std::vector<double>> first(n), second(n);
    for (auto& v : first) v.reserve(steps / 10);
    for (auto& v : second) v.reserve(steps / 10);
    PotentialEvalContext ctx(cfg.potential);
    PolymerState x = burned, scratch = burned;
    NoiseCursor cur(path, n, path.steps(burn.t_end));
    std::vector<double> f(n, 0.0), dw(n, 0.0);
    const double sigma = cfg.sde.sigma();
    for (std::int64_t s2 = 0; s2 < steps; ++s2) {
      for (std::size_t k = 1; k <= n; ++k)
        f[k - 1] = -ctx.eval(k, x.coords[k - 1]).first;
      cur.fill(dw);
      kernels::active().em_step(x.coords, x.right_boundary, f, dw, cfg.sde.dt,
                                sigma, scratch.coords);
      x.coords.swap(scratch.coords);
      if (s2 % 10 == 0) {  // record at a light stride to bound memory
        for (std::size_t k = 0; k < n; ++k) {
          first[k].push_back(x.coords[k]);
          second[k].push_back(x.coords[k] * x.coords[k]);
        }
      }
    }

    double worst_z = 0.0, min_ess_seen = 1e18;
    for (std::size_t k = 0; k < n; ++k) {
      RunningStat m1, m2;
      for (double v : first[k]) m1.add(v);
      for (double v : second[k]) m2.add(v);
      const double se1 = batch_se(first[k]);
      const double se2 = batch_se(second[k]);
      min_ess_seen = std::min(min_ess_seen, effective_samples(first[k]));
      worst_z = std::max(worst_z, std::fabs(m1.mean - oracle.mean[k]) /
                                      std::max(se1, 1e-12));
      worst_z = std::max(worst_z, std::fabs(m2.mean - oracle.second[k][k]) /
                                      std::max(se2, 1e-12));
      rep.metrics["mean_" + std::to_string(k + 1)] =
          Metric::with_ci(m1.mean, m1.mean - 3 * se1, m1.mean + 3 * se1);
      rep.metrics["oracle_mean_" + std::to_string(k + 1)] =
          Metric::exact(oracle.mean[k]);
      rep.metrics["second_" + std::to_string(k + 1)] =
          Metric::with_ci(m2.mean, m2.mean - 3 * se2, m2.mean + 3 * se2);
      rep.metrics["oracle_second_" + std::to_string(k + 1)] =
          Metric::exact(oracle.second[k][k]);
    }
    rep.metrics["worst_moment_z"] = Metric::exact(worst_z);
    rep.metrics["min_effective_samples"] = Metric::exact(min_ess_seen);
    rep.metrics["oracle_richardson_error"] = Metric::exact(oracle.richardson_error);

    const bool pass = worst_z <= 3.0 && min_ess_seen >= min_ess;
    rep.verdict = pass ? Verdict::pass : Verdict::fail;
    rep.verdict_rule =
        "all occupation moments within 3 batch-mean standard errors of the "
        "grid oracle, with effective samples >= " +
        std::to_string(min_ess);
  }
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_dlr: nested-volume consistency of the finite-volume measures.

ExperimentReport exp_dlr(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params,
                      {"outer_n", "inner_n", "reference_point", "mala_h",
                       "min_hits", "zero_check_hits"},
                      "params");
  const std::size_t outer_n = cfg.params.value("outer_n", std::size_t{4});
  const std::size_t inner_n = cfg.params.value("inner_n", std::size_t{2});
  const double r = cfg.params.value("reference_point", 0.3);
  const double mala_h = cfg.params.value("mala_h", 0.5);
  const std::size_t min_hits = cfg.params.value("min_hits", std::size_t{2000});
  const std::size_t zero_hits =
      cfg.params.value("zero_check_hits", std::size_t{2000});

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const double beta = cfg.sde.beta();

  GibbsSpec outer{outer_n, beta, 0.5, cfg.potential};
  const auto main_rep = dlr_check(outer, inner_n, r, mala_h, min_hits,
                                  cfg.noise_seed + 17);
  double max_ks_ratio = 0.0;
  for (std::size_t k = 0; k < main_rep.ks_stats.size(); ++k) {
    rep.metrics["ks_" + std::to_string(k + 1)] =
        Metric::exact(main_rep.ks_stats[k]);
    max_ks_ratio =
        std::max(max_ks_ratio, main_rep.ks_stats[k] / main_rep.ks_critical);
  }
  rep.metrics["ks_critical"] = Metric::exact(main_rep.ks_critical);
  rep.metrics["conditional_hits"] = Metric::exact(double(main_rep.conditional_hits));
  rep.metrics["bin_half_width"] = Metric::exact(main_rep.bin_half_width);

  // zero-potential case against the exact bridge
  GibbsSpec zero_outer{outer_n, beta, 0.5, PotentialField::zero_field()};
  const auto zero_rep = dlr_check(zero_outer, inner_n, r, mala_h, zero_hits,
                                  cfg.noise_seed + 18);
  double zero_ratio = 0.0;
  for (std::size_t k = 0; k < zero_rep.ks_stats.size(); ++k)
    zero_ratio = std::max(zero_ratio, zero_rep.ks_stats[k] / zero_rep.ks_critical);
  rep.metrics["zero_ks_max_ratio"] = Metric::exact(zero_ratio);

  const bool pass = max_ks_ratio < 1.0 && zero_ratio < 1.0 &&
                    main_rep.conditional_hits >= min_hits;
  rep.verdict = pass ? Verdict::pass : Verdict::fail;
  rep.verdict_rule =
      "all per-coordinate KS statistics below the 1% critical value, both for "
      "the configured potential and the exact zero-potential bridge";
  if (main_rep.widened_bin)
    rep.notes.push_back("conditioning bin was widened to gather enough hits");
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_ordering_by_noise: chains with distinct slopes and crossed starts get
// ordered under shared noise; optional steering toward a flat window if the
// unsteered phase has not ordered by half time.

ExperimentReport exp_ordering_by_noise(const RunConfig& cfg) {
  reject_unknown_keys(
      cfg.params,
      {"u", "v", "crossing_depth", "crossing_width", "epsilon", "freq_gate",
       "steer", "steer_probe_rows", "steer_window", "steer_eps",
       "steer_search_radius", "control_seeds"},
      "params");
  const double u = cfg.params.value("u", 1.0);
  const double v = cfg.params.value("v", 0.0);
  const double crossing_depth = cfg.params.value("crossing_depth", 2.0);
  const std::size_t crossing_width =
      cfg.params.value("crossing_width", std::size_t{8});
  const double eps = cfg.params.value("epsilon", 1e-12);
  const double freq_gate = cfg.params.value("freq_gate", 0.9);
  const bool steer = cfg.params.value("steer", true);
  const std::size_t probe_rows = cfg.params.value("steer_probe_rows", std::size_t{4});
  const double steer_window = cfg.params.value("steer_window", 10.0);
  const double steer_eps = cfg.params.value("steer_eps", 0.5);
  const double steer_radius = cfg.params.value("steer_search_radius", 400.0);
  const std::size_t control_seeds =
      cfg.params.value("control_seeds", std::size_t{10});

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;
  const double dt = cfg.sde.dt;
  if (cfg.potential.kind == PotentialKind::random_trig)
    rep.notes.push_back(
        "warning: random_trig has no flat regions; the ordering mechanism "
        "relies on them and may be slow");

  // flat window for the steering phase, found once per environment
  double flat_center = 0.0;
  bool have_flat = false;
  if (steer && cfg.potential.kind == PotentialKind::shot_noise) {
    const auto win = find_flat_window(cfg.potential, probe_rows, 2.0, 1e-3,
                                      steer_radius);
    if (win) {
      flat_center = win->center;
      have_flat = true;
    } else {
      rep.notes.push_back("no flat window found within the search radius");
    }
  }

  auto make_crossed = [&](PolymerState& x0, PolymerState& y0) {
    x0 = Ray{u, 0.0}.materialize(n);
    y0 = Ray{v, 0.0}.materialize(n);
    for (std::size_t k = 0; k < std::min(crossing_width, n); ++k)
      x0.coords[k] = y0.coords[k] - crossing_depth;  // dip x below y near 0
  };

  struct SeedResult {
    double tau = -1.0;       // first ordering time, -1 if never
    double phase = 0.0;      // 1 = unsteered, 2 = steered
    double persist_violations = 0.0;
  };

  const std::int64_t total_steps = NoisePath(0, dt).steps(cfg.sde.t_end);
  const std::int64_t half_steps = total_steps / 2;

  auto run_seed = [&](std::uint64_t seed, double sigma_override,
                      bool allow_steer) -> SeedResult {
    SeedResult res;
    PolymerState x, y;
    make_crossed(x, y);
    SdeConfig sc = cfg.sde;
    sc.sigma_override = sigma_override;
    NoisePath base(seed, dt);

    PotentialEvalContext ctx_x(cfg.potential), ctx_y(cfg.potential);
    std::vector<double> fx(n), fy(n), dwx(n);
    PolymerState sx = x, sy = y;
    const double sigma = sc.sigma();

    NoisePath active_path = base;
    NoiseCursor cur(active_path, n, 0);
    bool steered = false;
    std::int64_t ordered_since = -1;

    for (std::int64_t s = 0; s < total_steps; ++s) {
      if (allow_steer && !steered && have_flat && s == half_steps &&
          ordered_since < 0) {
        // escalate: pin the noise near the flat-window center for a while
        const double t_c = double(half_steps) * dt;
        std::vector<SteerWindow> wins = {{SteerWindow::Mode::pinned_near,
                                          t_c + dt, t_c + dt + steer_window,
                                          flat_center / sigma, steer_eps}};
        active_path = NoisePath::steered(base, wins, n);
        cur = NoiseCursor(active_path, n, s);
        steered = true;
      }
      for (std::size_t k = 1; k <= n; ++k) {
        fx[k - 1] = -ctx_x.eval(k, x.coords[k - 1]).first;
        fy[k - 1] = -ctx_y.eval(k, y.coords[k - 1]).first;
      }
      cur.fill(dwx);
      kernels::active().em_step(x.coords, x.right_boundary, fx, dwx, dt, sigma,
                                sx.coords);
      kernels::active().em_step(y.coords, y.right_boundary, fy, dwx, dt, sigma,
                                sy.coords);
      x.coords.swap(sx.coords);
      y.coords.swap(sy.coords);

      const double gap = kernels::active().min_diff(x.coords, y.coords);
      if (ordered_since < 0) {
        if (gap >= -eps && x.right_boundary >= y.right_boundary - eps) {
          ordered_since = s + 1;
          res.tau = double(s + 1) * dt;
          res.phase = steered ? 2.0 : 1.0;
        }
      } else if (gap < -eps) {
        res.persist_violations += 1.0;
      }
    }
    return res;
  };

  std::vector<SeedResult> results(cfg.seeds.size());
  for_each_seed(cfg.seeds.size(), [&](std::size_t i) {
    results[i] = run_seed(seed_of(cfg, i), -1.0, steer);
  });

  std::vector<double> taus, phases(cfg.seeds.size(), 0.0);
  double ordered = 0.0, persist = 0.0, phase1 = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    phases[i] = results[i].phase;
    if (results[i].tau >= 0.0) {
      ordered += 1.0;
      taus.push_back(results[i].tau);
      if (results[i].phase == 1.0) phase1 += 1.0;
    }
    persist += results[i].persist_violations;
  }
  const double freq = ordered / double(results.size());
  rep.per_seed["tau"] = [&] {
    std::vector<double> t(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) t[i] = results[i].tau;
    return t;
  }();
  rep.per_seed["phase"] = phases;
  rep.metrics["ordering_frequency"] = Metric::exact(freq);
  rep.metrics["ordering_frequency_unsteered"] =
      Metric::exact(phase1 / double(results.size()));
  rep.metrics["persist_violations"] = Metric::exact(persist);
  if (!taus.empty()) {
    rep.metrics["tau_median"] = Metric::exact(quantile(taus, 0.5));
    rep.metrics["tau_p90"] = Metric::exact(quantile(taus, 0.9));
  }

  // negative control: deterministic dynamics may get stuck at local minima
  double stalls = 0.0;
  for (std::size_t i = 0; i < control_seeds; ++i) {
    const auto r = run_seed(seed_of(cfg, i % cfg.seeds.size()), 0.0, false);
    if (r.tau < 0.0) stalls += 1.0;
  }
  rep.metrics["control_stall_fraction"] =
      Metric::exact(stalls / double(control_seeds));
  rep.notes.push_back(
      "sigma = 0 control reports stalls; stalling is expected in a rugged "
      "landscape but not asserted per-seed");

  write_csv(artifact_path(cfg, "ordering_tau.csv"), "seed,tau,phase", [&] {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < results.size(); ++i)
      rows.push_back({double(cfg.seeds[i]), results[i].tau, results[i].phase});
    return rows;
  }());
  rep.artifacts.push_back(artifact_path(cfg, "ordering_tau.csv"));

  const bool pass = freq >= freq_gate && persist == 0.0;
  rep.verdict = pass ? Verdict::pass : Verdict::fail;
  rep.verdict_rule = "ordering_frequency >= " + std::to_string(freq_gate) +
                     " and no order violations after tau";
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_1f1s_pullback: deeper pullbacks of distinct initial conditions in the
// same slope class collapse to one state.

ExperimentReport exp_1f1s_pullback(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params,
                      {"v", "offsets", "depths", "rel_threshold",
                       "min_pass_seeds", "control_slope_gap", "forward_t"},
                      "params");
  const double v = cfg.params.value("v", 0.0);
  const std::vector<double> offsets =
      cfg.params.value("offsets", std::vector<double>{-5.0, 0.0, 5.0});
  const std::vector<double> depths =
      cfg.params.value("depths", std::vector<double>{-10.0, -20.0, -40.0, -80.0});
  const double rel_threshold = cfg.params.value("rel_threshold", 1e-3);
  const std::size_t min_pass =
      cfg.params.value("min_pass_seeds",
                       std::size_t(std::ceil(0.9 * double(cfg.seeds.size()))));
  const double control_gap = cfg.params.value("control_slope_gap", 0.5);
  const double forward_t = cfg.params.value("forward_t", 40.0);

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;

  std::vector<PolymerState> ics;
  for (double a : offsets) ics.push_back(Ray{v, a}.materialize(n));
  double init_dist = 0.0;
  for (std::size_t i = 0; i < ics.size(); ++i)
    for (std::size_t j = i + 1; j < ics.size(); ++j)
      init_dist = std::max(init_dist, sup_distance_ll(ics[i], ics[j]));
  rep.metrics["initial_distance"] = Metric::exact(init_dist);

  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<std::vector<double>> dist_by_depth(
      n_seeds, std::vector<double>(depths.size(), 0.0));
  for_each_seed(n_seeds, [&](std::size_t i) {
    NoisePath path(seed_of(cfg, i), cfg.sde.dt);
    for (std::size_t d = 0; d < depths.size(); ++d) {
      std::vector<PolymerState> finals;
      for (const auto& ic : ics)
        finals.push_back(pullback_evolve(ic, cfg.potential, path, cfg.sde,
                                         depths[d]));
      double dist = 0.0;
      for (std::size_t a = 0; a < finals.size(); ++a)
        for (std::size_t b = a + 1; b < finals.size(); ++b)
          dist = std::max(dist, sup_distance_ll(finals[a], finals[b]));
      dist_by_depth[i][d] = dist;
    }
  });

  std::size_t pass_seeds = 0;
  std::vector<double> final_dist(n_seeds, 0.0);
  for (std::size_t i = 0; i < n_seeds; ++i) {
    bool monotone = true;
    for (std::size_t d = 1; d < depths.size(); ++d)
      monotone = monotone && dist_by_depth[i][d] <= dist_by_depth[i][d - 1];
    final_dist[i] = dist_by_depth[i].back();
    if (monotone && final_dist[i] <= rel_threshold * init_dist) ++pass_seeds;
  }
  rep.per_seed["final_distance"] = final_dist;
  rep.metrics["pass_seeds"] = Metric::exact(double(pass_seeds));
  rep.metrics["final_distance_median"] =
      Metric::exact(quantile(final_dist, 0.5));
  rep.metrics["final_distance_max"] = Metric::exact(quantile(final_dist, 1.0));

  // forward-time synchronization of two of the initial conditions
  {
    NoisePath path(seed_of(cfg, 0), cfg.sde.dt);
    SdeConfig sc = cfg.sde;
    sc.t_end = forward_t;
    sc.snapshot_stride = forward_t / 8.0;
    const auto ta = evolve(ics.front(), cfg.potential, path, sc);
    const auto tb = evolve(ics.back(), cfg.potential, path, sc);
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < ta.states.size(); ++s)
      rows.push_back({ta.times[s], sup_distance_ll(ta.states[s], tb.states[s])});
    write_csv(artifact_path(cfg, "forward_sync.csv"), "t,distance", rows);
    rep.artifacts.push_back(artifact_path(cfg, "forward_sync.csv"));
    rep.metrics["forward_distance_initial"] = Metric::exact(rows.front()[1]);
    rep.metrics["forward_distance_final"] = Metric::exact(rows.back()[1]);
  }

  // negative control: distinct slopes do not synchronize (they order)
  double control_final = 0.0;
  {
    NoisePath path(seed_of(cfg, 0), cfg.sde.dt);
    const auto a = pullback_evolve(Ray{v, 0.0}.materialize(n), cfg.potential,
                                   path, cfg.sde, depths.back());
    const auto b =
        pullback_evolve(Ray{v + control_gap, 0.0}.materialize(n), cfg.potential,
                        path, cfg.sde, depths.back());
    control_final = sup_distance_ll(a, b);
  }
  rep.metrics["control_final_distance"] = Metric::exact(control_final);

  // Chains with distinct slopes keep an LL distance of about the slope gap.
  const bool pass = pass_seeds >= min_pass &&
                    rep.metrics["forward_distance_final"].value <
                        rep.metrics["forward_distance_initial"].value &&
                    control_final >= 0.5 * control_gap;
  rep.verdict = pass ? Verdict::pass : Verdict::fail;
  rep.verdict_rule =
      "at least " + std::to_string(min_pass) +
      " seeds decay monotonically across depths to <= " +
      std::to_string(rel_threshold) +
      " of the initial distance; forward distance decays; distinct-slope "
      "control stays separated by >= half the slope gap";
  rep.notes.push_back(
      "contraction threshold is an artifact choice; the theorem gives no rate");
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_galerkin_convergence: nested truncations with identical keys agree on
// the inner half, better and better as n doubles.

ExperimentReport exp_galerkin_convergence(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params,
                      {"n_list", "ratio_gate", "zero_floor", "slope",
                       "run_control", "control_n_list", "control_t_end"},
                      "params");
  const std::vector<std::size_t> n_list = cfg.params.value(
      "n_list", std::vector<std::size_t>{128, 256, 512, 1024});
  const double ratio_gate = cfg.params.value("ratio_gate", 0.7);
  const double zero_floor = cfg.params.value("zero_floor", 1e-13);
  const double slope = cfg.params.value("slope", 0.5);
  const bool run_control = cfg.params.value("run_control", true);

  Timer timer;
  ExperimentReport rep = new_report(cfg);

  auto discrepancies = [&](const std::vector<std::size_t>& ns, double t_end,
                           std::uint64_t seed) {
    std::vector<PolymerState> finals;
    for (std::size_t nn : ns) {
      SdeConfig sc = cfg.sde;
      sc.n = nn;
      sc.t_end = t_end;
      NoisePath path(seed, sc.dt);
      finals.push_back(
          evolve_final(Ray{slope, 0.0}.materialize(nn), cfg.potential, path, sc));
    }
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
      double m = 0.0;
      for (std::size_t k = 1; k <= ns[i] / 2; ++k)
        m = std::max(m, std::fabs(finals[i].coords[k - 1] -
                                  finals[i + 1].coords[k - 1]));
      d.push_back(m);
    }
    return d;
  };

  bool pass = true;
  std::vector<double> worst_d(n_list.size() - 1, 0.0);
  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    const auto d = discrepancies(n_list, cfg.sde.t_end, seed_of(cfg, si));
    for (std::size_t i = 0; i < d.size(); ++i)
      worst_d[i] = std::max(worst_d[i], d[i]);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      const bool below_floor = d[i] <= zero_floor && d[i + 1] <= zero_floor;
      if (!below_floor && !(d[i + 1] <= ratio_gate * d[i])) pass = false;
    }
  }
  for (std::size_t i = 0; i < worst_d.size(); ++i)
    rep.metrics["discrepancy_" + std::to_string(n_list[i])] =
        Metric::exact(worst_d[i]);
  bool all_floor = true;
  for (double d : worst_d) all_floor = all_floor && d <= zero_floor;
  if (all_floor)
    rep.notes.push_back(
        "all discrepancies at the rounding floor: the frozen boundary has no "
        "influence on the inner half at this horizon (strongest convergence)");

  // Negative control: scale the horizon with n so the diffusive spread keeps
  // reaching the compared window; the discrepancy then stops shrinking.
  double control_ratio = 0.0;
  if (run_control) {
    const std::vector<std::size_t> cns = cfg.params.value(
        "control_n_list", std::vector<std::size_t>{8, 16, 32});
    const double base_t = cfg.params.value("control_t_end", 16.0);
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < cns.size(); ++i) {
      const double scale = double(cns[i] * cns[i]) / double(cns[0] * cns[0]);
      const double t_pair = std::round(base_t * scale / cfg.sde.dt) * cfg.sde.dt;
      d.push_back(
          discrepancies({cns[i], cns[i + 1]}, t_pair, seed_of(cfg, 0))[0]);
    }
    for (std::size_t i = 0; i + 1 < d.size(); ++i)
      control_ratio = std::max(control_ratio, d[i + 1] / std::max(d[i], 1e-300));
    rep.metrics["control_ratio"] = Metric::exact(control_ratio);
    if (control_ratio <= ratio_gate) pass = false;
  }

  rep.verdict = pass ? Verdict::pass : Verdict::fail;
  rep.verdict_rule =
      "successive discrepancy ratios <= " + std::to_string(ratio_gate) +
      " (or both sides at the rounding floor); control ratio above the gate";
  rep.wall_time_s = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// exp_fluctuation_exponent: growth of |x_k - v k| with k under the stationary
// measure.  The frozen right endpoint suppresses fluctuations by the harmonic
// factor (n+1-k)/(n+1); the estimator divides it out so the zero-potential
// oracle sits exactly at 1/2 (see the ledgered calibration notes).

ExperimentReport exp_fluctuation_exponent(const RunConfig& cfg) {
  reject_unknown_keys(cfg.params,
                      {"v", "collect_t", "fit_lo_frac", "fit_hi_frac",
                       "endpoint_correction", "xi_zero_tol",
                       "run_frozen_control"},
                      "params");
  const double v = cfg.params.value("v", 0.0);
  const double collect_t = cfg.params.value("collect_t", 50.0);
  const double lo_frac = cfg.params.value("fit_lo_frac", 0.1);
  const double hi_frac = cfg.params.value("fit_hi_frac", 0.5);
  const bool correct = cfg.params.value("endpoint_correction", true);
  const double xi_zero_tol = cfg.params.value("xi_zero_tol", 0.05);
  const bool frozen_control = cfg.params.value("run_frozen_control", true);

  Timer timer;
  ExperimentReport rep = new_report(cfg);
  const std::size_t n = cfg.sde.n;
  const std::size_t k_lo = std::max<std::size_t>(2, std::size_t(lo_frac * n));
  const std::size_t k_hi = std::max(k_lo + 4, std::size_t(hi_frac * n));
  const double beta = cfg.sde.beta();

  auto fit_xi = [&](const std::vector<double>& mean_abs) {
    std::vector<double> xs, ys;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      double a = mean_abs[k - 1];
      if (correct) a /= std::sqrt(double(n + 1 - k) / double(n + 1));
      if (a <= 0.0) continue;
      xs.push_back(std::log(double(k)));
      ys.push_back(std::log(a));
    }
    return fit_line(xs, ys);
  };

  // closed-form oracle at zero potential: E|x_k - vk| = sqrt(2 Var_k / pi)
  {
    GaussianBridge bridge{n, beta, v * double(n + 1)};
    std::vector<double> mean_abs(n, 0.0);
    for (std::size_t k = 1; k <= n; ++k)
      mean_abs[k - 1] =
          std::sqrt(2.0 * bridge.covariance(k, k) / std::numbers::pi);
    const auto fit = fit_xi(mean_abs);
    rep.metrics["xi_oracle_zero"] = Metric::exact(fit.slope);
  }

  // Sampled estimate: |x_k - v k| pooled over time snapshots and seeds, one
  // fit on the pooled profile, jackknife over seeds for the CI.  (Per-seed
  // fits are useless here: within one trajectory the slow bridge modes are
  // effectively frozen, so a single seed sees one quenched profile.)
  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<std::vector<double>> abs_by_seed(n_seeds);
  std::vector<double> frozen_flag(n_seeds, 0.0);
  for_each_seed(n_seeds, [&](std::size_t i) {
    const std::uint64_t seed = seed_of(cfg, i);
    PolymerState x0;
    GaussianBridge bridge{n, beta, v * double(n + 1)};
    x0.coords = exact_gaussian_sample(bridge, 1, seed ^ 0xb1dull)[0];
    x0.right_boundary = v * double(n + 1);
    double t0 = 0.0;
    NoisePath path(seed, cfg.sde.dt);
    if (cfg.potential.kind != PotentialKind::zero) {
      // equilibrate through the dynamics from the tilted bridge
      SdeConfig burn = cfg.sde;  // sde.t_end acts as the burn-in horizon
      x0 = evolve_final(x0, cfg.potential, path, burn);
      t0 = cfg.sde.t_end;  // continue on the same grid after the burn-in
    }
    SdeConfig sc = cfg.sde;
    sc.t_end = collect_t;
    sc.snapshot_stride = 1.0;
    const auto traj = evolve(x0, cfg.potential, path, sc, t0);
    auto& mean_abs = abs_by_seed[i];
    mean_abs.assign(n, 0.0);
    double moved = 0.0;
    for (std::size_t s = 1; s < traj.states.size(); ++s) {
      for (std::size_t k = 1; k <= n; ++k)
        mean_abs[k - 1] +=
            std::fabs(traj.states[s].coords[k - 1] - v * double(k));
      moved += sup_distance(traj.states[s], traj.states[s - 1]);
    }
    for (auto& a : mean_abs) a /= double(traj.states.size() - 1);
    frozen_flag[i] = moved < 1e-9 ? 1.0 : 0.0;
  });

  auto pooled_fit = [&](std::size_t skip) {
    std::vector<double> pooled(n, 0.0);
    std::size_t used = 0;
    for (std::size_t i = 0; i < n_seeds; ++i) {
      if (i == skip) continue;
      ++used;
      for (std::size_t k = 0; k < n; ++k) pooled[k] += abs_by_seed[i][k];
    }
    for (auto& a : pooled) a /= double(used);
    return fit_xi(pooled).slope;
  };
  const double xi_hat = pooled_fit(n_seeds);  // skip index out of range: use all
  std::vector<double> xi_jack(n_seeds, 0.0);
  RunningStat jk;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    xi_jack[i] = pooled_fit(i);
    jk.add(xi_jack[i]);
  }
  // jackknife standard error: (S-1)/sqrt(S) * sd of the leave-one-out fits
  const double jk_se =
      double(n_seeds - 1) * jk.sd() / std::sqrt(double(n_seeds));
  const double ci = 2.0 * jk_se;
  rep.per_seed["xi_jackknife"] = xi_jack;
  rep.metrics["xi_hat"] = Metric::with_ci(xi_hat, xi_hat - ci, xi_hat + ci);
  rep.metrics["xi_upper_ci"] = Metric::exact(xi_hat + ci);
  rep.metrics["xi_consistent_with_3_4"] =
      Metric::exact(xi_hat <= 0.8 ? 1.0 : 0.0);

  bool frozen = false;
  for (double f : frozen_flag) frozen = frozen || f > 0.0;

  // frozen negative control: sigma = 0 from a Gibbs draw has no fluctuation
  if (frozen_control) {
    SdeConfig sc = cfg.sde;
    sc.sigma_override = 0.0;
    sc.t_end = 2.0;
    GaussianBridge bridge{n, beta, v * double(n + 1)};
    PolymerState x0;
    x0.coords = exact_gaussian_sample(bridge, 1, 0xf00du)[0];
    x0.right_boundary = v * double(n + 1);
    NoisePath path(1, sc.dt);
    const auto a = evolve_final(x0, PotentialField::zero_field(), path, sc);
    const auto b = evolve_final(a, PotentialField::zero_field(), path, sc, 2.0);
    rep.metrics["control_frozen_motion"] = Metric::exact(sup_distance(a, b));
  }

  if (frozen) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("fluctuations frozen (no noise): regression meaningless");
  } else {
    bool pass = xi_hat + ci < 1.0;
    if (cfg.potential.kind == PotentialKind::zero)
      pass = pass && std::fabs(xi_hat - 0.5) <= xi_zero_tol;
    rep.verdict = pass ? Verdict::pass : Verdict::fail;
  }
  rep.verdict_rule =
      "xi upper CI < 1 (sublinearity); zero potential additionally requires "
      "|xi - 1/2| <= " +
      std::to_string(xi_zero_tol) + "; xi <= 3/4 reported informationally";
  if (!correct)
    rep.notes.push_back("endpoint correction disabled: raw regression slope");
  rep.wall_time_s = timer.seconds();
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = {
      {"exp_heat_flow_suite",
       "heat flow: ray stationarity, convexity preservation, finite ordering time",
       "slopes, ray_tol, det_n"},
      {"exp_monotonicity",
       "order preservation of the flow under shared noise (with unstable-dt control)",
       "epsilon, gap_scale, touch_fraction, control_dt, control_pairs"},
      {"exp_slope_invariance",
       "tail slope estimate and (v-, v+) bracket are preserved by the flow",
       "slopes, perturbation, tail_fraction, drift_tol, bracket_growth_tol, wide_bracket"},
      {"exp_gibbs_invariance",
       "finite-volume Gibbs measures are invariant (bridge / grid-oracle moments)",
       "trajectories, cov_rel_tol, eigen_tol, pool_stride, oracle_resolution, min_ess, run_control, control_trajectories"},
      {"exp_dlr",
       "nested-volume conditional laws match the inner-volume measures (KS)",
       "outer_n, inner_n, reference_point, mala_h, min_hits, zero_check_hits"},
      {"exp_shear_equivariance",
       "the flow commutes with shear of chains and potential jointly",
       "v, tolerance, control_min"},
      {"exp_ordering_by_noise",
       "chains with distinct slopes get ordered in finite time under shared noise",
       "u, v, crossing_depth, crossing_width, epsilon, freq_gate, steer, "
       "steer_probe_rows, steer_window, steer_eps, steer_search_radius, control_seeds"},
      {"exp_1f1s_pullback",
       "pullbacks from deeper start times collapse to a single state per slope",
       "v, offsets, depths, rel_threshold, min_pass_seeds, control_slope_gap, forward_t"},
      {"exp_galerkin_convergence",
       "nested truncations converge geometrically on the inner half",
       "n_list, ratio_gate, zero_floor, slope, run_control, control_n_list, control_t_end"},
      {"exp_fluctuation_exponent",
       "transversal fluctuation exponent: sublinear, near 1/2 at zero potential",
       "v, collect_t, fit_lo_frac, fit_hi_frac, endpoint_correction, "
       "xi_zero_tol, run_frozen_control"},
  };
  return catalog;
}

ExperimentReport run_experiment(const RunConfig& cfg) {
  ExperimentReport rep;
  if (cfg.experiment == "exp_heat_flow_suite")
    rep = exp_heat_flow_suite(cfg);
  else if (cfg.experiment == "exp_monotonicity")
    rep = exp_monotonicity(cfg);
  else if (cfg.experiment == "exp_slope_invariance")
    rep = exp_slope_invariance(cfg);
  else if (cfg.experiment == "exp_gibbs_invariance")
    rep = exp_gibbs_invariance(cfg);
  else if (cfg.experiment == "exp_dlr")
    rep = exp_dlr(cfg);
  else if (cfg.experiment == "exp_shear_equivariance")
    rep = exp_shear_equivariance(cfg);
  else if (cfg.experiment == "exp_ordering_by_noise")
    rep = exp_ordering_by_noise(cfg);
  else if (cfg.experiment == "exp_1f1s_pullback")
    rep = exp_1f1s_pullback(cfg);
  else if (cfg.experiment == "exp_galerkin_convergence")
    rep = exp_galerkin_convergence(cfg);
  else if (cfg.experiment == "exp_fluctuation_exponent")
    rep = exp_fluctuation_exponent(cfg);
  else {
    std::string names;
    for (const auto& e : experiment_catalog()) names += " " + e.name;
    throw ConfigError("unknown experiment \"" + cfg.experiment +
                      "\"; valid names:" + names);
  }
  // every report records the exact gate and provenance
  write_report(artifact_path(cfg, "report_" + cfg.experiment + ".json"), rep);
  return rep;
}

}  // namespace polymerlab
