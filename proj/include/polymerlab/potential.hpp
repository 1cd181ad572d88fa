#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "polymerlab/polymer.hpp"

// Seeded random environments F = (F_k) with C^2 sample paths, i.i.d. rows and
// stationarity in r.  Evaluation is a pure function of (seed, k, r); rows use
// disjoint counter streams, so they are independent by construction.

namespace polymerlab {

enum class PotentialKind { zero, shot_noise, random_trig };

struct PotentialField {
  PotentialKind kind = PotentialKind::zero;
  std::uint64_t seed = 0;
  double amplitude = 0.0;

  // shot noise: Poisson(lambda) bump centers per unit length, bump half-width
  double lambda = 1.0;
  double width = 1.0;

  // random trig: F_k(r) = amplitude * sum_j a_j (A_kj cos(w_j r) + B_kj sin(w_j r))
  std::vector<double> frequencies;
  std::vector<double> mode_weights;

  // Xi^v applied to the field: evaluates as F_k(r - k v).
  double shear_velocity = 0.0;

  static PotentialField zero_field();
  static PotentialField shot(std::uint64_t seed, double amplitude,
                             double lambda, double width);
  static PotentialField trig(std::uint64_t seed, double amplitude,
                             std::vector<double> frequencies,
                             std::vector<double> mode_weights);
};

struct PotentialSample {
  double value = 0.0;
  double first = 0.0;   // F'_k(r)
  double second = 0.0;  // F''_k(r)
};

// Pure evaluation; derivatives are analytic.  Throws for k = 0 (the origin
// carries no potential: energy sums start at k = 1).
PotentialSample evaluate(const PotentialField& field, std::size_t k, double r);

// Bump centers of the shot-noise field in integer cell [m, m+1), in
// generation order.  Exposed for tests and the flat-window finder.
std::vector<double> shot_noise_cell_points(const PotentialField& field,
                                           std::size_t k, std::int64_t m);
std::uint64_t shot_noise_overflow_count();

// Per-row memo of recently touched cells / mode coefficients.  Evaluations
// through a context are bitwise identical to evaluate(); this is what the
// integrator hot loop uses.
class PotentialEvalContext {
 public:
  explicit PotentialEvalContext(const PotentialField& field);

  PotentialSample eval(std::size_t k, double r);
  const PotentialField& field() const { return field_; }

 private:
  struct ShotRow {
    std::int64_t m_lo = 1, m_hi = 0;  // empty range
    std::vector<double> points;
    std::vector<std::size_t> offsets;  // per-cell start, size = cells + 1
  };
  struct TrigRow {
    bool ready = false;
    std::vector<double> cos_amp, sin_amp;  // a_j * A_kj, a_j * B_kj
  };

  const ShotRow& shot_row(std::size_t k, std::int64_t m_lo, std::int64_t m_hi);

  PotentialField field_;
  std::vector<ShotRow> shot_rows_;
  std::vector<TrigRow> trig_rows_;
};

// drift_k = (Laplacian x)_k + f_k(x_k) with f = -F'.
std::vector<double> drift(const PotentialField& field, const PolymerState& x);
std::vector<double> drift(PotentialEvalContext& ctx, const PolymerState& x);

// (Xi^v F)_k(r) = F_k(r - k v).
PotentialField shear_potential(const PotentialField& field, double v);

struct GrowthReport {
  double fitted_constant = 0.0;    // max_k sup|f_k| / (1 + log k + log_+ R)
  std::size_t worst_row = 0;
  double worst_sup = 0.0;
  std::vector<double> row_sup;     // sup_{|r|<=R} |f_k(r)| per row
  std::uint64_t overflow_events = 0;
};

// Advisory scan of sup|f_k| against the C(1 + log k + log_+ R) envelope.
GrowthReport validate_growth(const PotentialField& field, std::size_t k_max,
                             double r_window);

struct FlatWindow {
  double center = 0.0;
  double sup_f = 0.0;            // sup over rows 1..n_probe and the window
  std::uint64_t cells_scanned = 0;
};

// Scans r for a window [a-l, a+l] with sup_{k<=n_probe} |f_k| <= delta.
// Expected search effort grows exponentially in lambda*l*n_probe.
std::optional<FlatWindow> find_flat_window(const PotentialField& field,
                                           std::size_t n_probe, double half_width,
                                           double delta, double search_radius);

}  // namespace polymerlab
