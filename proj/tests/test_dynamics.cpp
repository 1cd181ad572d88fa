#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "polymerlab/dynamics.hpp"
#include "polymerlab/gibbs.hpp"
#include "polymerlab/rng.hpp"

using namespace polymerlab;

namespace {

SdeConfig basic_cfg(std::size_t n, double dt, double t_end) {
  SdeConfig cfg;
  cfg.n = n;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.temperature = 1.0;
  cfg.lipschitz_bound = 30.0;
  return cfg;
}

PotentialField test_shot(std::uint64_t seed = 321) {
  return PotentialField::shot(seed, 1.0, 1.0, 1.0);
}

}  // namespace

TEST_CASE("consistent ray with zero drift and zero noise is a fixed point") {
  auto cfg = basic_cfg(64, 0.01, 1.0);
  cfg.sigma_override = 0.0;
  const auto x0 = Ray{0.5, 0.0}.materialize(64);
  NoisePath path(1, cfg.dt);
  const auto xf = evolve_final(x0, PotentialField::zero_field(), path, cfg);
  CHECK(xf.coords == x0.coords);  // bitwise: the laplacian vanishes exactly
}

TEST_CASE("single explicit Euler step on a spike") {
  auto cfg = basic_cfg(5, 0.02, 0.0);
  cfg.sigma_override = 0.0;
  PolymerState x;
  x.coords = {1.0, 0.0, 0.0, 0.0, 0.0};
  x.right_boundary = 0.0;
  NoisePath path(1, cfg.dt);
  PotentialEvalContext ctx(PotentialField::zero_field());
  const auto x1 = step(x, ctx, path, 0, cfg);
  CHECK(x1.coords[0] == doctest::Approx(1.0 - 2 * 0.02));
  CHECK(x1.coords[1] == doctest::Approx(0.02));
  CHECK(x1.coords[2] == 0.0);
}

TEST_CASE("one step matches an independent scalar reimplementation") {
  auto cfg = basic_cfg(3, 0.01, 0.0);
  const auto F = test_shot();
  NoisePath path(99, cfg.dt);
  PolymerState x;
  x.coords = {0.3, -0.7, 1.9};
  x.right_boundary = 2.5;
  PotentialEvalContext ctx(F);
  const auto got = step(x, ctx, path, 5, cfg);

  const double sigma = std::sqrt(2.0);
  const double lap[3] = {0.0 - 2 * 0.3 + (-0.7), 0.3 - 2 * (-0.7) + 1.9,
                         -0.7 - 2 * 1.9 + 2.5};
  for (int k = 0; k < 3; ++k) {
    const double f = -evaluate(F, k + 1, x.coords[k]).first;
    const double dw = path.increment(k + 1, 5);
    const double expect = x.coords[k] + cfg.dt * (lap[k] + f) + sigma * dw;
    CHECK(got.coords[k] == doctest::Approx(expect).epsilon(1e-14));
  }
  CHECK(got.right_boundary == x.right_boundary);
}

TEST_CASE("t_end = 0 yields only the initial state") {
  auto cfg = basic_cfg(8, 0.01, 0.0);
  const auto x0 = Ray{1.0, 0.0}.materialize(8);
  NoisePath path(3, cfg.dt);
  const auto traj = evolve(x0, test_shot(), path, cfg);
  CHECK(traj.states.size() == 1);
  CHECK(traj.final_state() == x0);
}

TEST_CASE("cocycle property holds bitwise on the grid") {
  const double s = 1.0, t = 2.0;
  auto cfg = basic_cfg(32, 0.01, s + t);
  const auto F = test_shot(777);
  NoisePath path(1234, cfg.dt);
  const auto x0 = Ray{0.3, 1.0}.materialize(32);

  const auto direct = evolve_final(x0, F, path, cfg);

  auto cfg_s = cfg;
  cfg_s.t_end = s;
  const auto mid = evolve_final(x0, F, path, cfg_s);
  auto cfg_t = cfg;
  cfg_t.t_end = t;
  const auto composed = evolve_final(mid, F, path.time_shift(s), cfg_t);

  CHECK(direct.coords == composed.coords);
}

TEST_CASE("evolving from a later grid start equals shifting the path") {
  auto cfg = basic_cfg(16, 0.01, 1.0);
  const auto F = test_shot(31);
  NoisePath path(11, cfg.dt);
  const auto x0 = Ray{0.0, 0.5}.materialize(16);
  const auto a = evolve_final(x0, F, path, cfg, 3.0);
  const auto b = evolve_final(x0, F, path.time_shift(3.0), cfg, 0.0);
  CHECK(a.coords == b.coords);
}

TEST_CASE("shear equivariance of the flow") {
  auto cfg = basic_cfg(64, 0.01, 2.0);
  const auto F = test_shot(555);
  NoisePath path(808, cfg.dt);
  const auto x0 = Ray{0.2, -1.0}.materialize(64);
  const double v = 0.7;

  const auto lhs = evolve_final(shear(x0, v), shear_potential(F, v), path, cfg);
  const auto rhs = shear(evolve_final(x0, F, path, cfg), v);
  for (std::size_t k = 0; k < 64; ++k)
    CHECK(std::fabs(lhs.coords[k] - rhs.coords[k]) < 1e-9);
}

TEST_CASE("heat flow fixes consistent rays") {
  for (double u : {-1.0, 0.5, 2.0}) {
    const auto x0 = Ray{u, 0.0}.materialize(200);
    const auto xt = heat_flow(x0, 10.0, 0.05);
    double err = 0.0;
    for (std::size_t k = 1; k <= 200; ++k)
      err = std::max(err, std::fabs(xt.coords[k - 1] - u * double(k)));
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("heat flow of a negatively offset ray orders in finite time") {
  // x = r^1 - 2 with boundary frozen at n - 1; the limit profile is
  // x*_k = k (n-1)/(n+1), reached monotonically from below.
  const std::size_t n = 24;
  const auto x0 = Ray{1.0, -2.0}.materialize(n);
  CHECK(x0.coords[0] < 0.0);

  // limit check via a long semi-implicit run (large dt is fine there)
  auto xt = heat_flow(x0, 4000.0, 0.5, Scheme::semi_implicit_laplacian);
  for (std::size_t k = 1; k <= n; ++k)
    CHECK(xt.coords[k - 1] ==
          doctest::Approx(double(k) * double(n - 1) / double(n + 1)).epsilon(1e-6));

  // finite ordering time: there is T with S^T x strictly positive
  double T = 0.0;
  bool positive = false;
  for (T = 1.0; T <= 512.0 && !positive; T *= 2.0) {
    const auto s = heat_flow(x0, T, 0.25, Scheme::semi_implicit_laplacian);
    positive = true;
    for (double c : s.coords) positive = positive && c > 0.0;
  }
  CHECK(positive);

  // monotone in t for convex initial data
  const auto a = heat_flow(x0, 1.0, 0.25, Scheme::semi_implicit_laplacian);
  const auto b = heat_flow(x0, 2.0, 0.25, Scheme::semi_implicit_laplacian);
  CHECK(partial_order_leq(x0, a, 1e-12));
  CHECK(partial_order_leq(a, b, 1e-12));
}

TEST_CASE("convexity is preserved by the heat flow") {
  // random convex data: Delta x >= 0
  rng::Stream s(5150, rng::Domain::experiment, 3);
  const std::size_t n = 40;
  PolymerState x;
  x.coords.resize(n);
  std::vector<double> curv(n + 1);
  for (auto& c : curv) c = s.next_u01();  // nonnegative second difference
  // integrate twice from the pinned origin
  double slope = -3.0, val = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    val += slope;
    x.coords[k] = val;
    slope += curv[k];
  }
  x.right_boundary = val + slope;
  for (double v : discrete_laplacian(x)) CHECK(v >= 0.0);

  for (double t : {0.5, 2.0, 8.0}) {
    const auto xt = heat_flow(x, t, 0.05);
    for (double v : discrete_laplacian(xt)) CHECK(v >= -1e-12);
  }
}

TEST_CASE("kinetic energy is non-increasing along the heat flow") {
  rng::Stream s(31338, rng::Domain::experiment, 4);
  PolymerState x;
  x.coords.resize(32);
  for (auto& v : x.coords) v = 2.0 * s.next_u01() - 1.0;
  x.right_boundary = 0.4;
  GibbsSpec spec{32, 1.0, x.right_boundary, PotentialField::zero_field()};
  double prev = energy(spec, x.coords);
  PolymerState cur = x;
  for (int it = 0; it < 20; ++it) {
    cur = heat_flow(cur, 0.5, 0.05);
    const double e = energy(spec, cur.coords);
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("order preservation under shared noise") {
  const std::size_t n = 32;
  auto cfg = basic_cfg(n, 0.01, 2.0);
  for (const auto& F : {PotentialField::zero_field(), test_shot(11)}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      NoisePath path(4000 + seed, cfg.dt);
      rng::Stream s(seed, rng::Domain::experiment, 6);
      PolymerState x0;
      x0.coords.resize(n);
      for (auto& v : x0.coords) v = 4.0 * (s.next_u01() - 0.5);
      x0.right_boundary = 0.0;
      PolymerState y0 = x0;
      for (std::size_t k = 0; k < n; ++k) y0.coords[k] += 2.0 * s.next_u01();
      // adversarial: touch at a few coordinates
      y0.coords[n / 2] = x0.coords[n / 2];
      y0.coords[n / 2 + 1] = x0.coords[n / 2 + 1];

      const auto xf = evolve_final(x0, F, path, cfg);
      const auto yf = evolve_final(y0, F, path, cfg);
      CHECK(partial_order_leq(xf, yf, 1e-12));
    }
  }
}

TEST_CASE("explicit scheme rejects unstable steps unless told otherwise") {
  auto cfg = basic_cfg(8, 0.6, 1.2);
  const auto x0 = Ray{0.0, 0.0}.materialize(8);
  NoisePath path(1, cfg.dt);
  CHECK_THROWS_AS(evolve_final(x0, PotentialField::zero_field(), path, cfg),
                  std::invalid_argument);
  cfg.enforce_step_condition = false;
  CHECK_NOTHROW(evolve_final(x0, PotentialField::zero_field(), path, cfg));
}

TEST_CASE("overflow fails fast with diagnostics") {
  auto cfg = basic_cfg(16, 0.8, 1600.0);
  cfg.enforce_step_condition = false;
  cfg.sigma_override = 0.0;
  PolymerState x0;
  x0.coords.assign(16, 0.0);
  x0.coords[7] = 1.0;
  x0.right_boundary = 0.0;
  NoisePath path(1, cfg.dt);
  CHECK_THROWS_AS(evolve_final(x0, PotentialField::zero_field(), path, cfg),
                  IntegrationError);
}

TEST_CASE("nested truncations agree away from the frozen boundary") {
  const std::size_t n = 64;
  auto cfg_small = basic_cfg(n, 0.01, 5.0);
  auto cfg_big = basic_cfg(2 * n, 0.01, 5.0);
  const auto F = test_shot(99);
  NoisePath path(17, 0.01);
  const auto xs = evolve_final(Ray{0.5, 0.0}.materialize(n), F, path, cfg_small);
  const auto xb = evolve_final(Ray{0.5, 0.0}.materialize(2 * n), F, path, cfg_big);
  double near = 0.0, far = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double d = std::fabs(xs.coords[k - 1] - xb.coords[k - 1]);
    if (k <= n / 2)
      near = std::max(near, d);
    else
      far = std::max(far, d);
  }
  CHECK(near < 1e-12);  // influence of the boundary has not reached k <= n/2
  CHECK(far > 0.0);     // but it is visible near the boundary
}

TEST_CASE("pullback from t_start = 0 is the identity") {
  auto cfg = basic_cfg(16, 0.01, 0.0);
  const auto x0 = Ray{0.1, 0.0}.materialize(16);
  NoisePath path(3, cfg.dt);
  const auto y = pullback_evolve(x0, test_shot(), path, cfg, 0.0);
  CHECK(y == x0);
  CHECK_THROWS_AS(pullback_evolve(x0, test_shot(), path, cfg, 0.5),
                  std::invalid_argument);
}

TEST_CASE("pullback uses two-sided noise consistently with evolve") {
  auto cfg = basic_cfg(16, 0.01, 0.0);
  const auto F = test_shot(5);
  NoisePath path(21, cfg.dt);
  const auto x0 = Ray{0.0, 1.0}.materialize(16);
  const auto a = pullback_evolve(x0, F, path, cfg, -2.0);
  auto cfg2 = cfg;
  cfg2.t_end = 2.0;
  const auto b = evolve_final(x0, F, path, cfg2, -2.0);
  CHECK(a.coords == b.coords);
}

TEST_CASE("semi-implicit scheme approaches the explicit solution") {
  const std::size_t n = 32;
  PolymerState x0;
  x0.coords.assign(n, 0.0);
  x0.coords[10] = 4.0;
  x0.right_boundary = 1.0;
  const auto a = heat_flow(x0, 2.0, 0.001);
  const auto b = heat_flow(x0, 2.0, 0.001, Scheme::semi_implicit_laplacian);
  for (std::size_t k = 0; k < n; ++k)
    CHECK(a.coords[k] == doctest::Approx(b.coords[k]).epsilon(1e-3));
}

TEST_CASE("trajectory snapshots and dumps") {
  auto cfg = basic_cfg(8, 0.01, 3.0);
  cfg.snapshot_stride = 1.0;
  const auto F = test_shot(12);
  NoisePath path(9, cfg.dt);
  const auto traj = evolve(Ray{1.0, 0.0}.materialize(8), F, path, cfg);
  REQUIRE(traj.times.size() == 4);  // t = 0, 1, 2, 3
  CHECK(traj.times[0] == 0.0);
  CHECK(traj.times[3] == doctest::Approx(3.0));

  const std::string bin = "/tmp/polymerlab_traj_test.bin";
  write_trajectory_binary(bin, traj);
  const auto back = read_trajectory_binary(bin);
  REQUIRE(back.states.size() == traj.states.size());
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    CHECK(back.times[s] == traj.times[s]);
    CHECK(back.states[s].coords == traj.states[s].coords);
    CHECK(back.states[s].right_boundary == traj.states[s].right_boundary);
  }
  const std::string csv = "/tmp/polymerlab_traj_test.csv";
  write_trajectory_csv(csv, traj);
  std::FILE* fp = std::fopen(csv.c_str(), "r");
  REQUIRE(fp != nullptr);
  std::fclose(fp);
}
