#pragma once

#include <cstdint>
#include <memory>
#include <vector>

// Reproducible two-sided Wiener increments on a fixed grid.  Each increment
// is N(0, dt) and a pure function of (seed, coordinate, grid cell); time
// shifts are exact reindexings, which is what makes the cocycle property hold
// bitwise.  Steering windows reproduce the control events used in the
// ordering-by-noise argument: an envelope |W_k| <= M k^{1/8} before t_start
// and a pinned tube |W_k - a| <= eps^2 k^{1/8} on [t_start, t_end] (the first
// coordinate tracks the ramp (t - t_start + 1) a instead).

namespace polymerlab {

struct SteerWindow {
  enum class Mode { bounded_by, pinned_near };
  Mode mode = Mode::pinned_near;
  double t_start = 0.0;
  double t_end = 0.0;
  double target = 0.0;  // a (pinned_near only)
  double scale = 0.0;   // M for bounded_by, eps for pinned_near
};

class NoisePath {
 public:
  NoisePath(std::uint64_t seed, double dt);

  // Steered variant of a plain path, prepared for coordinates 1..n_max.
  // Throws on overlapping/misaligned windows or infeasible constraints.
  static NoisePath steered(const NoisePath& base,
                           std::vector<SteerWindow> windows, std::size_t n_max);

  double dt() const { return dt_; }
  std::uint64_t seed() const { return seed_; }
  bool is_steered() const { return steer_ != nullptr; }

  // Grid cell j covers [j dt, (j+1) dt); j may be negative.
  double increment(std::size_t k, std::int64_t j) const;

  // theta^s: increments reindexed by s/dt.  s must be grid-aligned.
  NoisePath time_shift(double s) const;

  // Number of grid steps in a grid-aligned duration t (throws otherwise).
  std::int64_t steps(double t) const;

  // W_k at grid index j (0 at j = 0).  O(|j|); for tests and verification.
  double cumulative(std::size_t k, std::int64_t j) const;

 private:
  struct Steering;

  double raw_increment(std::size_t k, std::int64_t j) const;
  double jitter(std::size_t k, std::int64_t j, std::size_t window) const;
  std::uint32_t salt(std::size_t k) const;

  std::uint64_t seed_;
  double dt_;
  double sqrt_dt_;
  std::int64_t shift_steps_ = 0;
  std::shared_ptr<const Steering> steer_;

  friend class NoiseCursor;
};

// Sequential increment reader used by the integrator; caches the second lane
// of each Philox block so consecutive steps cost one block per two steps.
// Results are bitwise identical to NoisePath::increment.
class NoiseCursor {
 public:
  NoiseCursor(const NoisePath& path, std::size_t n, std::int64_t j_start);

  // Fills out[k-1] with increment(k, j) for the current step, then advances.
  void fill(std::vector<double>& out);

  std::int64_t current_step() const { return j_; }

 private:
  const NoisePath* path_;  // non-owning; the path must outlive the cursor
  std::int64_t j_;
  std::vector<double> spare_;      // stashed odd lanes, indexed by k-1
  std::vector<std::int64_t> spare_block_;  // block index the stash belongs to
};

}  // namespace polymerlab
