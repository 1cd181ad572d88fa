#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "polymerlab/rng.hpp"

using namespace polymerlab;

// Known-answer vectors from the Random123 reference distribution
// (philox4x32, 10 rounds).
TEST_CASE("philox4x32-10 known answers") {
  {
    const auto b = rng::philox4x32(0, 0, 0);
    CHECK(b.w[0] == 0x6627e8d5u);
    CHECK(b.w[1] == 0xe169c58du);
    CHECK(b.w[2] == 0xbc57ac4cu);
    CHECK(b.w[3] == 0x9b00dbd8u);
  }
  {
    const std::uint64_t ones = 0xffffffffffffffffull;
    const auto b = rng::philox4x32(ones, ones, ones);
    CHECK(b.w[0] == 0x408f276du);
    CHECK(b.w[1] == 0x41c83b0eu);
    CHECK(b.w[2] == 0xa20bc7c6u);
    CHECK(b.w[3] == 0x6d5451fdu);
  }
  {
    // ctr = {243f6a88 85a308d3 13198a2e 03707344}, key = {a4093822 299f31d0}
    const std::uint64_t ctr_lo = (0x85a308d3ull << 32) | 0x243f6a88ull;
    const std::uint64_t ctr_hi = (0x03707344ull << 32) | 0x13198a2eull;
    const std::uint64_t key = (0x299f31d0ull << 32) | 0xa4093822ull;
    const auto b = rng::philox4x32(key, ctr_hi, ctr_lo);
    CHECK(b.w[0] == 0xd16cfe09u);
    CHECK(b.w[1] == 0x94fdccebu);
    CHECK(b.w[2] == 0x5001e420u);
    CHECK(b.w[3] == 0x24126ea1u);
  }
}

TEST_CASE("block is a pure function of its key") {
  const auto a = rng::block(42, rng::Domain::wiener, 7, 1234);
  const auto b = rng::block(42, rng::Domain::wiener, 7, 1234);
  CHECK(a.w == b.w);
  const auto c = rng::block(42, rng::Domain::shot_points, 7, 1234);
  CHECK(a.w != c.w);
  const auto d = rng::block(43, rng::Domain::wiener, 7, 1234);
  CHECK(a.w != d.w);
}

TEST_CASE("normal pairs pass basic moment checks") {
  const std::size_t n = 200000;
  double s = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const auto z = rng::normal_pair(1, rng::Domain::wiener, 1, i);
    for (double v : {z.z0, z.z1}) {
      s += v;
      s2 += v * v;
      s3 += v * v * v;
      s4 += v * v * v * v;
    }
  }
  const double m = s / n;
  const double var = s2 / n - m * m;
  CHECK(std::fabs(m) < 4.0 / std::sqrt(double(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::fabs(s3 / n) < 0.05);
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("stream uniforms are in (0,1) and reproducible") {
  rng::Stream a(9, rng::Domain::sampler, 3);
  rng::Stream b(9, rng::Domain::sampler, 3);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.next_u01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.next_u01());
  }
}

TEST_CASE("poisson stream has the right mean") {
  rng::Stream s(5, rng::Domain::shot_points, 11);
  const int n = 50000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += s.next_poisson(1.3);
  CHECK(sum / n == doctest::Approx(1.3).epsilon(0.03));
}
