#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random number generation (Philox-4x32-10, Salmon et al. 2011).
// Every variate in the library is a pure function of (seed, domain, row, index),
// which is what makes trajectories, potentials and noise paths exactly
// reproducible regardless of evaluation order or thread count.

namespace polymerlab::rng {

// Domain tags keep the key streams of unrelated consumers disjoint.
enum class Domain : std::uint32_t {
  wiener = 0x01,          // noise increments, (row k, block index)
  shot_points = 0x02,     // shot-noise Poisson cells, (row k, cell)
  trig_modes = 0x03,      // random-trig mode amplitudes, (row k, mode)
  sampler = 0x04,         // MCMC / exact-sampler draws, (chain id, draw)
  experiment = 0x05,      // experiment-local randomness (pair generation etc.)
  steer_jitter = 0x06,    // steering-window jitter, (row k, grid index)
};

struct Block {
  std::array<std::uint32_t, 4> w;
};

namespace detail {

constexpr std::uint32_t M0 = 0xD2511F53u;
constexpr std::uint32_t M1 = 0xCD9E8D57u;
constexpr std::uint32_t W0 = 0x9E3779B9u;
constexpr std::uint32_t W1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                       std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace detail

// One Philox-4x32-10 block: 128-bit counter, 64-bit key, 128 output bits.
inline Block philox4x32(std::uint64_t key, std::uint64_t ctr_hi,
                        std::uint64_t ctr_lo) {
  std::array<std::uint32_t, 4> c = {
      static_cast<std::uint32_t>(ctr_lo), static_cast<std::uint32_t>(ctr_lo >> 32),
      static_cast<std::uint32_t>(ctr_hi), static_cast<std::uint32_t>(ctr_hi >> 32)};
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int r = 0; r < 10; ++r) {
    detail::round_once(c, k0, k1);
    k0 += detail::W0;
    k1 += detail::W1;
  }
  return Block{c};
}

// Library-wide keying convention: counter = (domain:row | index).
inline Block block(std::uint64_t seed, Domain domain, std::uint64_t row,
                   std::uint64_t index) {
  const std::uint64_t hi =
      (static_cast<std::uint64_t>(domain) << 48) ^ row;
  return philox4x32(seed, hi, index);
}

// 53-bit uniforms in (0,1); strictly positive so log() is always safe.
inline double u01(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits53 =
      (static_cast<std::uint64_t>(hi) << 21) ^ (static_cast<std::uint64_t>(lo) >> 11);
  return (static_cast<double>(bits53) + 0.5) * 0x1p-53;
}

struct NormalPair {
  double z0, z1;
};

// Box-Muller on the four words of one block.
inline NormalPair normal_pair(const Block& b) {
  const double u1 = u01(b.w[0], b.w[1]);
  const double u2 = u01(b.w[2], b.w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

inline NormalPair normal_pair(std::uint64_t seed, Domain domain,
                              std::uint64_t row, std::uint64_t index) {
  return normal_pair(block(seed, domain, row, index));
}

// Sequential view over one (seed, domain, row) counter line.  Used where a
// variable number of draws is needed (Poisson cells, samplers); the state is
// just the next counter value, so streams are trivially restartable.
class Stream {
 public:
  Stream(std::uint64_t seed, Domain domain, std::uint64_t row,
         std::uint64_t start_index = 0)
      : seed_(seed), domain_(domain), row_(row), index_(start_index), word_(4) {}

  std::uint32_t next_u32() {
    if (word_ == 4) {
      cur_ = block(seed_, domain_, row_, index_++);
      word_ = 0;
    }
    return cur_.w[word_++];
  }

  double next_u01() {
    const std::uint32_t hi = next_u32();
    const std::uint32_t lo = next_u32();
    return u01(hi, lo);
  }

  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_u01();
    const double u2 = next_u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Knuth's product method; fine for the small rates used here.
  int next_poisson(double mean) {
    const double limit = std::exp(-mean);
    int count = 0;
    double prod = next_u01();
    while (prod > limit) {
      ++count;
      prod *= next_u01();
    }
    return count;
  }

 private:
  std::uint64_t seed_;
  Domain domain_;
  std::uint64_t row_;
  std::uint64_t index_;
  Block cur_{};
  int word_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// FNV-1a, used for config digests and derived seeds.
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace polymerlab::rng
