#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Finite truncations of semi-infinite chains pinned at the origin, the
// weighted norms used to measure them, the coordinatewise partial order, the
// shear action and tail slope estimation.

namespace polymerlab {

// Chain coordinates x_1..x_n plus the frozen value playing the role of
// x_{n+1}.  The origin x_0 = 0 is implicit and never stored.
struct PolymerState {
  std::vector<double> coords;
  double right_boundary = 0.0;

  std::size_t n() const { return coords.size(); }
  bool operator==(const PolymerState&) const = default;
};

// Straight chain (r^u + a)_k = u*k + a.  Offset rays are "broken" at the
// pinned origin, which is what drives the deterministic ordering mechanism.
struct Ray {
  double slope = 0.0;
  double offset = 0.0;

  PolymerState materialize(std::size_t n) const;
};

// Weighted sequence norm (alpha, p); p = infinity is a distinguished state,
// not a sentinel value of p.
struct NormSpec {
  double alpha = 1.0;
  double p = 2.0;       // meaningful only when !p_infinite
  bool p_infinite = false;

  static NormSpec finite(double alpha, double p) { return {alpha, p, false}; }
  static NormSpec sup(double alpha) { return {alpha, 0.0, true}; }

  bool pi_admissible() const;  // alpha*p > 1 (always true for p = infinity)
};

// The two distinguished norms: LL = (1, inf) and star = (3/4, 2).
NormSpec norm_ll();
NormSpec norm_star();

// Throws std::invalid_argument for alpha <= 0 or p < 1.
double weighted_norm(std::span<const double> x, const NormSpec& spec);
double weighted_norm(const PolymerState& x, const NormSpec& spec);

// result_k = x_{k-1} - 2 x_k + x_{k+1} with x_0 = 0, x_{n+1} = right_boundary.
std::vector<double> discrete_laplacian(const PolymerState& x);

// x <= y coordinatewise (and on the right boundary) up to slack eps >= 0.
// Throws std::invalid_argument on mismatched n.
bool partial_order_leq(const PolymerState& x, const PolymerState& y,
                       double eps = 1e-12);

// (Xi^v x)_k = x_k + k v; the boundary moves by (n+1) v.
PolymerState shear(const PolymerState& x, double v);

struct SlopeEstimate {
  double slope = 0.0;      // least-squares slope of x_k vs k on the tail window
  double v_minus = 0.0;    // min of x_k / k over the window
  double v_plus = 0.0;     // max of x_k / k over the window
  std::size_t window = 0;  // number of tail points used

  double bracket_width() const { return v_plus - v_minus; }
};

// Tail least-squares slope plus the (v-, v+) bracket of x_k/k; the finite-n
// surrogate for membership in a slope class.  Requires n >= 10 and a window
// of at least 2 points.
SlopeEstimate estimate_slope(const PolymerState& x, double tail_fraction);

// Flat JSON object {n, right_boundary, coords:[..]} used for checkpointing.
std::string to_json(const PolymerState& x);
PolymerState polymer_from_json(const std::string& text);

}  // namespace polymerlab
