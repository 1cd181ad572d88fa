#include "polymerlab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "polymerlab/rng.hpp"

namespace polymerlab {
namespace {

constexpr int kMaxSalt = 1000;
constexpr int kJitterTries = 16;

std::int64_t aligned_steps(double t, double dt) {
  const double q = t / dt;
  const double r = std::round(q);
  if (std::fabs(q - r) > 1e-9 * std::max(1.0, std::fabs(q)))
    throw std::invalid_argument("time is not grid-aligned");
  return static_cast<std::int64_t>(r);
}

// Salted row id: retries of a coordinate's stream live in the upper bits.
std::uint64_t row_id(std::size_t k, std::uint32_t salt) {
  return static_cast<std::uint64_t>(k) | (static_cast<std::uint64_t>(salt) << 40);
}

double wiener_lane(std::uint64_t seed, std::uint64_t row, std::int64_t j) {
  const std::int64_t b = j >> 1;  // floor division pairs lanes (2b, 2b+1)
  const auto z = rng::normal_pair(
      rng::block(seed, rng::Domain::wiener, row, static_cast<std::uint64_t>(b)));
  return (j & 1) ? z.z1 : z.z0;
}

}  // namespace

struct NoisePath::Steering {
  std::vector<SteerWindow> windows;  // sorted by t_start, non-overlapping
  std::size_t n_max = 0;
  std::int64_t last_index = 0;               // last grid index any window touches
  std::vector<std::uint32_t> salts;          // per coordinate
  std::vector<std::vector<double>> anchors;  // [window][k-1]: W at j_start - 1
  std::vector<std::int64_t> j_start, j_end;

  double tolerance(std::size_t i, std::size_t k) const {
    const auto& w = windows[i];
    const double env = (k == 1) ? 1.0 : std::pow(static_cast<double>(k), 0.125);
    if (w.mode == SteerWindow::Mode::bounded_by) return w.scale * env;
    return w.scale * w.scale * env;
  }

  double target_at(std::size_t i, std::size_t k, std::int64_t j, double dt) const {
    const auto& w = windows[i];
    if (w.mode != SteerWindow::Mode::pinned_near) return 0.0;
    if (k == 1) {
      const double t_rel = static_cast<double>(j - j_start[i]) * dt;
      return (t_rel + 1.0) * w.target;
    }
    return w.target;
  }
};

NoisePath::NoisePath(std::uint64_t seed, double dt)
    : seed_(seed), dt_(dt), sqrt_dt_(std::sqrt(dt)) {
  if (!(dt > 0.0)) throw std::invalid_argument("noise: dt must be positive");
}

std::uint32_t NoisePath::salt(std::size_t k) const {
  if (!steer_ || k > steer_->n_max) return 0;
  return steer_->salts[k - 1];
}

double NoisePath::raw_increment(std::size_t k, std::int64_t j) const {
  return sqrt_dt_ * wiener_lane(seed_, row_id(k, salt(k)), j);
}

// Truncated-normal jitter inside the pinned tube, pure in (k, j, window).
double NoisePath::jitter(std::size_t k, std::int64_t j, std::size_t window) const {
  const double tol = steer_->tolerance(window, k);
  rng::Stream s(seed_ ^ (0x5eedu + window), rng::Domain::steer_jitter, row_id(k, 0),
                static_cast<std::uint64_t>(j) * kJitterTries);
  const double sigma = tol / 4.0;
  for (int t = 0; t < kJitterTries; ++t) {
    const double z = sigma * s.next_normal();
    if (std::fabs(z) <= tol) return z;
  }
  return 0.0;
}

double NoisePath::increment(std::size_t k, std::int64_t j) const {
  if (k == 0) throw std::invalid_argument("noise coordinates start at k = 1");
  j += shift_steps_;
  if (!steer_) return raw_increment(k, j);
  if (k > steer_->n_max)
    throw std::invalid_argument("steered path not prepared for this coordinate");

  const auto& st = *steer_;
  for (std::size_t i = 0; i < st.windows.size(); ++i) {
    if (st.windows[i].mode != SteerWindow::Mode::pinned_near) continue;
    const std::int64_t j1 = st.j_start[i], j2 = st.j_end[i];
    if (j + 1 < j1 || j + 1 > j2) continue;
    const double next = st.target_at(i, k, j + 1, dt_) + jitter(k, j + 1, i);
    if (j >= j1) {
      const double prev = st.target_at(i, k, j, dt_) + jitter(k, j, i);
      return next - prev;
    }
    return next - st.anchors[i][k - 1];  // entry step from the anchor point
  }
  return raw_increment(k, j);
}

NoisePath NoisePath::time_shift(double s) const {
  NoisePath p = *this;
  p.shift_steps_ += aligned_steps(s, dt_);
  return p;
}

std::int64_t NoisePath::steps(double t) const { return aligned_steps(t, dt_); }

double NoisePath::cumulative(std::size_t k, std::int64_t j) const {
  double w = 0.0;
  if (j >= 0) {
    for (std::int64_t i = 0; i < j; ++i) w += increment(k, i);
  } else {
    for (std::int64_t i = j; i < 0; ++i) w -= increment(k, i);
  }
  return w;
}

NoisePath NoisePath::steered(const NoisePath& base,
                             std::vector<SteerWindow> windows,
                             std::size_t n_max) {
  if (base.is_steered())
    throw std::invalid_argument("steering an already steered path");
  if (base.shift_steps_ != 0)
    throw std::invalid_argument("steer the unshifted path, then shift");
  NoisePath p = base;
  if (windows.empty()) return p;
  if (n_max == 0) throw std::invalid_argument("steered: need n_max >= 1");

  auto st = std::make_shared<Steering>();
  std::sort(windows.begin(), windows.end(),
            [](const SteerWindow& a, const SteerWindow& b) {
              return a.t_start < b.t_start;
            });
  st->windows = std::move(windows);
  st->n_max = n_max;

  double prev_end = -1.0;
  for (const auto& w : st->windows) {
    if (!(w.t_end > w.t_start) || w.t_start < 0.0)
      throw std::invalid_argument("steer window: need t_end > t_start >= 0");
    if (w.t_start < prev_end) throw std::invalid_argument("steer windows overlap");
    if (!(w.scale > 0.0))
      throw std::invalid_argument("steer window: infeasible scale");
    if (w.mode == SteerWindow::Mode::pinned_near && w.t_start < base.dt_)
      throw std::invalid_argument("pinned window must start at or after dt");
    prev_end = w.t_end;
    st->j_start.push_back(aligned_steps(w.t_start, base.dt_));
    st->j_end.push_back(aligned_steps(w.t_end, base.dt_));
    st->anchors.emplace_back(n_max, 0.0);
  }
  st->last_index = st->j_end.back();
  st->salts.assign(n_max, 0);
  p.steer_ = st;

  // One ascending pass per coordinate: walk the steered cumulative value,
  // record anchors at pinned-window entries, and retry with a fresh salt
  // whenever a bounded window is violated.
  for (std::size_t k = 1; k <= n_max; ++k) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxSalt && !ok; ++attempt) {
      st->salts[k - 1] = static_cast<std::uint32_t>(attempt);
      ok = true;
      double cur = 0.0;  // value at grid point j; starts at W(0) = 0
      for (std::int64_t j = 0; j <= st->last_index && ok; ++j) {
        bool pinned = false;
        for (std::size_t i = 0; i < st->windows.size(); ++i) {
          if (st->windows[i].mode != SteerWindow::Mode::pinned_near) continue;
          if (j >= st->j_start[i] && j <= st->j_end[i]) {
            if (j == st->j_start[i]) st->anchors[i][k - 1] = cur;
            cur = st->target_at(i, k, j, base.dt_) + p.jitter(k, j, i);
            pinned = true;
            break;
          }
        }
        if (!pinned && j > 0) cur += p.raw_increment(k, j - 1);
        for (std::size_t i = 0; i < st->windows.size(); ++i) {
          if (st->windows[i].mode != SteerWindow::Mode::bounded_by) continue;
          if (j >= st->j_start[i] && j <= st->j_end[i] &&
              std::fabs(cur) > st->tolerance(i, k))
            ok = false;
        }
      }
    }
    if (!ok)
      throw std::runtime_error(
          "steered: could not satisfy bounded window (infeasible constraints)");
  }

  // Post-hoc check of the pinned tubes on the grid.
  for (std::size_t i = 0; i < st->windows.size(); ++i) {
    if (st->windows[i].mode != SteerWindow::Mode::pinned_near) continue;
    for (std::size_t k = 1; k <= n_max; ++k)
      for (std::int64_t j = st->j_start[i]; j <= st->j_end[i]; ++j)
        if (std::fabs(p.jitter(k, j, i)) > st->tolerance(i, k))
          throw std::runtime_error("steered: pinned tube violated");
  }
  return p;
}

NoiseCursor::NoiseCursor(const NoisePath& path, std::size_t n,
                         std::int64_t j_start)
    : path_(&path), j_(j_start), spare_(n, 0.0),
      spare_block_(n, std::numeric_limits<std::int64_t>::min()) {}

void NoiseCursor::fill(std::vector<double>& out) {
  const std::size_t n = spare_.size();
  const std::int64_t j_eff = j_ + path_->shift_steps_;
  const bool plain = !path_->steer_;
  for (std::size_t k = 1; k <= n; ++k) {
    if (!plain) {
      out[k - 1] = path_->increment(k, j_);
      continue;
    }
    const std::int64_t b = j_eff >> 1;
    if ((j_eff & 1) && spare_block_[k - 1] == b) {
      out[k - 1] = spare_[k - 1];
      continue;
    }
    const auto z = rng::normal_pair(rng::block(path_->seed_, rng::Domain::wiener,
                                               row_id(k, 0),
                                               static_cast<std::uint64_t>(b)));
    if (j_eff & 1) {
      out[k - 1] = path_->sqrt_dt_ * z.z1;
    } else {
      out[k - 1] = path_->sqrt_dt_ * z.z0;
      spare_[k - 1] = path_->sqrt_dt_ * z.z1;
      spare_block_[k - 1] = b;
    }
  }
  ++j_;
}

}  // namespace polymerlab
