#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "polymerlab/potential.hpp"
#include "polymerlab/rng.hpp"

using namespace polymerlab;

namespace {

PotentialField default_shot(std::uint64_t seed = 2024) {
  return PotentialField::shot(seed, 1.0, 1.0, 1.0);
}

PotentialField default_trig(std::uint64_t seed = 99) {
  return PotentialField::trig(seed, 0.5, {0.3, 0.7, 1.3, 2.1},
                              {0.6, 0.3, 0.2, 0.1});
}

}  // namespace

TEST_CASE("zero potential evaluates to zero") {
  const auto f = PotentialField::zero_field();
  for (std::size_t k : {1, 5, 100})
    for (double r : {-10.0, 0.0, 3.7}) {
      const auto s = evaluate(f, k, r);
      CHECK(s.value == 0.0);
      CHECK(s.first == 0.0);
      CHECK(s.second == 0.0);
    }
}

TEST_CASE("row zero is rejected") {
  CHECK_THROWS_AS(evaluate(default_shot(), 0, 1.0), std::invalid_argument);
}

TEST_CASE("evaluation is deterministic bitwise") {
  for (const auto& f : {default_shot(), default_trig()}) {
    for (std::size_t k : {1, 3, 17}) {
      for (double r : {-5.3, 0.0, 12.25}) {
        const auto a = evaluate(f, k, r);
        const auto b = evaluate(f, k, r);
        CHECK(a.value == b.value);
        CHECK(a.first == b.first);
        CHECK(a.second == b.second);
      }
    }
  }
}

TEST_CASE("cached context evaluation matches the pure path bitwise") {
  for (const auto& f : {default_shot(), default_trig()}) {
    PotentialEvalContext ctx(f);
    rng::Stream s(7, rng::Domain::experiment, 9);
    for (int i = 0; i < 400; ++i) {
      const std::size_t k = 1 + static_cast<std::size_t>(s.next_u01() * 8);
      // wander back and forth to exercise cache invalidation
      const double r = 20.0 * std::sin(i * 0.37) + 3.0 * s.next_u01();
      const auto a = ctx.eval(k, r);
      const auto b = evaluate(f, k, r);
      CHECK(a.value == b.value);
      CHECK(a.first == b.first);
      CHECK(a.second == b.second);
    }
  }
}

TEST_CASE("single bump values at the center") {
  // Locate an isolated bump; at r = p the kernel contributes exactly
  // (amplitude, 0, -6 amplitude / w^2).
  const double w = 0.7, amp = 1.3;
  const auto f = PotentialField::shot(31415, amp, 0.15, w);
  bool found = false;
  for (std::int64_t m = 0; m < 400 && !found; ++m) {
    const auto pts = shot_noise_cell_points(f, 2, m);
    if (pts.size() != 1) continue;
    const double p = pts[0];
    const bool isolated = shot_noise_cell_points(f, 2, m - 1).empty() &&
                          shot_noise_cell_points(f, 2, m + 1).empty();
    if (!isolated) continue;
    found = true;
    const auto s = evaluate(f, 2, p);
    CHECK(s.value == doctest::Approx(amp).epsilon(1e-14));
    CHECK(s.first == doctest::Approx(0.0));
    CHECK(s.second == doctest::Approx(-6.0 * amp / (w * w)).epsilon(1e-14));
  }
  CHECK(found);
}

TEST_CASE("empty neighborhood gives an exactly flat sample") {
  const auto f = default_shot(555);
  bool found = false;
  for (std::int64_t m = 0; m < 500 && !found; ++m) {
    if (shot_noise_cell_points(f, 1, m).empty() &&
        shot_noise_cell_points(f, 1, m + 1).empty()) {
      const auto s = evaluate(f, 1, static_cast<double>(m) + 1.0);
      CHECK(s.value == 0.0);
      CHECK(s.first == 0.0);
      CHECK(s.second == 0.0);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("derivatives agree with central differences") {
  const double h = 1e-5;
  for (const auto& f : {default_shot(), default_trig()}) {
    rng::Stream s(123, rng::Domain::experiment, 10);
    for (int i = 0; i < 60; ++i) {
      const std::size_t k = 1 + static_cast<std::size_t>(s.next_u01() * 6);
      const double r = 40.0 * (s.next_u01() - 0.5);
      const auto c = evaluate(f, k, r);
      const auto up = evaluate(f, k, r + h);
      const auto dn = evaluate(f, k, r - h);
      CHECK(std::fabs((up.value - dn.value) / (2 * h) - c.first) < 5e-6);
      CHECK(std::fabs((up.first - dn.first) / (2 * h) - c.second) < 5e-5);
    }
  }
}

TEST_CASE("rows are statistically independent") {
  // correlation of F_1(r) and F_2(r) across seeds, fixed r
  const int trials = 1000;
  for (const bool trig : {false, true}) {
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
    for (int t = 0; t < trials; ++t) {
      const auto f = trig ? default_trig(6000 + t) : default_shot(6000 + t);
      const double a = evaluate(f, 1, 0.3).value;
      const double b = evaluate(f, 2, 0.3).value;
      s1 += a;
      s2 += b;
      s11 += a * a;
      s22 += b * b;
      s12 += a * b;
    }
    const double m1 = s1 / trials, m2 = s2 / trials;
    const double v1 = s11 / trials - m1 * m1, v2 = s22 / trials - m2 * m2;
    const double corr = (s12 / trials - m1 * m2) / std::sqrt(v1 * v2);
    CHECK(std::fabs(corr) < 3.0 / std::sqrt(double(trials)));
  }
}

TEST_CASE("fields are stationary in r") {
  auto scan = [](const PotentialField& f, double r0, double& mean, double& var) {
    double s = 0, s2 = 0;
    int cnt = 0;
    for (double r = r0; r < r0 + 100.0; r += 0.5) {
      const double v = evaluate(f, 1, r).value;
      s += v;
      s2 += v * v;
      ++cnt;
    }
    mean = s / cnt;
    var = s2 / cnt - mean * mean;
  };
  for (const bool trig : {false, true}) {
    double mnear = 0, vnear = 0, mfar = 0, vfar = 0;
    const int seeds = 60;
    double sm_near = 0, sm_far = 0, sv_near = 0, sv_far = 0;
    for (int t = 0; t < seeds; ++t) {
      const auto f = trig ? default_trig(7000 + t) : default_shot(7000 + t);
      scan(f, 0.0, mnear, vnear);
      scan(f, 1000.0, mfar, vfar);
      sm_near += mnear;
      sm_far += mfar;
      sv_near += vnear;
      sv_far += vfar;
    }
    CHECK(std::fabs(sm_near - sm_far) / seeds < 0.1);
    CHECK(std::fabs(sv_near - sv_far) / seeds < 0.1);
  }
}

TEST_CASE("drift of zero potential is the laplacian") {
  const auto x = Ray{1.5, 0.0}.materialize(30);
  const auto d = drift(PotentialField::zero_field(), x);
  for (double v : d) CHECK(v == 0.0);
}

TEST_CASE("shear potential substitution identity") {
  const auto f = default_shot();
  // exact in exact arithmetic: choose x_k and k v exactly representable
  const double v = 0.5;
  const auto fs = shear_potential(f, v);
  for (std::size_t k : {1, 2, 4, 8}) {
    const double xk = 3.25;
    const double xk_sheared = xk + double(k) * v;  // exact
    const auto a = evaluate(fs, k, xk_sheared);
    const auto b = evaluate(f, k, xk);
    CHECK(a.value == b.value);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
  const auto zs = shear_potential(PotentialField::zero_field(), 2.0);
  CHECK(evaluate(zs, 3, 1.0).value == 0.0);
  const auto f0 = shear_potential(f, 0.0);
  CHECK(evaluate(f0, 3, 1.7).value == evaluate(f, 3, 1.7).value);
}

TEST_CASE("growth report") {
  const auto zero_rep = validate_growth(PotentialField::zero_field(), 16, 10.0);
  CHECK(zero_rep.fitted_constant == 0.0);

  const auto rep = validate_growth(default_shot(), 32, 10.0);
  // |f| <= (6 amp/w^2) * (overlapping bumps); generous stack allowance
  CHECK(rep.worst_sup > 0.0);
  CHECK(rep.worst_sup < 6.0 * 8.0);
  CHECK(rep.fitted_constant > 0.0);

  const auto trep = validate_growth(default_trig(), 32, 10.0);
  CHECK(trep.worst_sup > 0.0);
}

TEST_CASE("flat window finder") {
  // sparse field: a fully flat stretch for rows 1..2 is easy to find
  const auto f = PotentialField::shot(777, 1.0, 0.3, 0.5);
  const auto win = find_flat_window(f, 2, 1.0, 1e-9, 300.0);
  REQUIRE(win.has_value());
  CHECK(win->sup_f <= 1e-9);
  PotentialEvalContext ctx(f);
  for (std::size_t k = 1; k <= 2; ++k)
    for (double r = win->center - 1.0; r <= win->center + 1.0; r += 0.05)
      CHECK(std::fabs(ctx.eval(k, r).first) <= 1e-9);
}

TEST_CASE("zero potential is trivially flat everywhere") {
  const auto win = find_flat_window(PotentialField::zero_field(), 4, 5.0, 0.0, 1.0);
  REQUIRE(win.has_value());
  CHECK(win->sup_f == 0.0);
}
