#include "polymerlab/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "polymerlab/kernels/kernels.hpp"

namespace polymerlab {

PolymerState Ray::materialize(std::size_t n) const {
  PolymerState s;
  s.coords.resize(n);
  for (std::size_t k = 1; k <= n; ++k)
    s.coords[k - 1] = slope * static_cast<double>(k) + offset;
  s.right_boundary = slope * static_cast<double>(n + 1) + offset;
  return s;
}

bool NormSpec::pi_admissible() const {
  if (p_infinite) return alpha > 0.0;
  return alpha * p > 1.0;
}

NormSpec norm_ll() { return NormSpec::sup(1.0); }
NormSpec norm_star() { return NormSpec::finite(0.75, 2.0); }

double weighted_norm(std::span<const double> x, const NormSpec& spec) {
  if (!(spec.alpha > 0.0))
    throw std::invalid_argument("weighted_norm: alpha must be positive");
  if (!spec.p_infinite && !(spec.p >= 1.0))
    throw std::invalid_argument("weighted_norm: p must be >= 1");

  if (spec.p_infinite) {
    double m = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double v = std::fabs(x[k]) / std::pow(static_cast<double>(k + 1), spec.alpha);
      m = std::max(m, v);
    }
    return m;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = std::fabs(x[k]) / std::pow(static_cast<double>(k + 1), spec.alpha);
    s += std::pow(v, spec.p);
  }
  return std::pow(s, 1.0 / spec.p);
}

double weighted_norm(const PolymerState& x, const NormSpec& spec) {
  return weighted_norm(std::span<const double>(x.coords), spec);
}

std::vector<double> discrete_laplacian(const PolymerState& x) {
  std::vector<double> out(x.n());
  kernels::active().laplacian(x.coords, x.right_boundary, out);
  return out;
}

bool partial_order_leq(const PolymerState& x, const PolymerState& y,
                       double eps) {
  if (x.n() != y.n())
    throw std::invalid_argument("partial_order_leq: mismatched n");
  const double m = kernels::active().min_diff(y.coords, x.coords);
  if (m < -eps) return false;
  return y.right_boundary - x.right_boundary >= -eps;
}

PolymerState shear(const PolymerState& x, double v) {
  PolymerState s = x;
  for (std::size_t k = 1; k <= s.n(); ++k)
    s.coords[k - 1] += static_cast<double>(k) * v;
  s.right_boundary += static_cast<double>(s.n() + 1) * v;
  return s;
}

SlopeEstimate estimate_slope(const PolymerState& x, double tail_fraction) {
  const std::size_t n = x.n();
  if (n < 10) throw std::invalid_argument("estimate_slope: need n >= 10");
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
    throw std::invalid_argument("estimate_slope: tail_fraction in (0,1]");
  const std::size_t window =
      static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  if (window < 2) throw std::invalid_argument("estimate_slope: window too small");
  const std::size_t k0 = n - window + 1;  // 1-based first index of the window

  // Least squares of x_k against k, plus the min/max bracket of x_k/k.
  double sk = 0.0, sx = 0.0, skk = 0.0, skx = 0.0;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double xv = x.coords[k - 1];
    sk += kk;
    sx += xv;
    skk += kk * kk;
    skx += kk * xv;
    vmin = std::min(vmin, xv / kk);
    vmax = std::max(vmax, xv / kk);
  }
  const double m = static_cast<double>(window);
  const double denom = m * skk - sk * sk;
  SlopeEstimate est;
  est.slope = (m * skx - sk * sx) / denom;
  est.v_minus = vmin;
  est.v_plus = vmax;
  est.window = window;
  return est;
}

std::string to_json(const PolymerState& x) {
  nlohmann::json j;
  j["n"] = x.n();
  j["right_boundary"] = x.right_boundary;
  j["coords"] = x.coords;
  return j.dump();
}

PolymerState polymer_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  PolymerState s;
  s.coords = j.at("coords").get<std::vector<double>>();
  s.right_boundary = j.at("right_boundary").get<double>();
  if (j.at("n").get<std::size_t>() != s.coords.size())
    throw std::invalid_argument("polymer_from_json: n does not match coords");
  if (s.coords.empty())
    throw std::invalid_argument("polymer_from_json: need n >= 1");
  for (double c : s.coords)
    if (!std::isfinite(c))
      throw std::invalid_argument("polymer_from_json: non-finite coordinate");
  return s;
}

}  // namespace polymerlab
