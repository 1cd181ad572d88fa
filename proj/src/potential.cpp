#include "polymerlab/potential.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "polymerlab/kernels/kernels.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {
namespace {

std::atomic<std::uint64_t> g_shot_overflow{0};

constexpr int kMaxPointsPerCell = 64;
constexpr std::uint64_t kDrawsPerCell = 128;  // counter slots reserved per cell

// C^2 bump: phi(u) = (1-u^2)^3 on |u| < 1, with phi' and phi'' vanishing at
// the support edge.
inline void accumulate_bump(double u, double inv_w, double amplitude,
                            PotentialSample& s) {
  if (!(u > -1.0 && u < 1.0)) return;
  const double t = 1.0 - u * u;
  const double t2 = t * t;
  s.value += amplitude * t * t2;
  s.first += amplitude * inv_w * (-6.0 * u * t2);
  s.second += amplitude * inv_w * inv_w * (t * (30.0 * u * u - 6.0));
}

std::vector<double> cell_points(const PotentialField& f, std::size_t k,
                                std::int64_t m) {
  rng::Stream st(f.seed, rng::Domain::shot_points, k,
                 static_cast<std::uint64_t>(m) * kDrawsPerCell);
  int count = st.next_poisson(f.lambda);
  if (count > kMaxPointsPerCell) {
    g_shot_overflow.fetch_add(1, std::memory_order_relaxed);
    count = kMaxPointsPerCell;
  }
  std::vector<double> pts(static_cast<std::size_t>(count));
  for (auto& p : pts) p = static_cast<double>(m) + st.next_u01();
  return pts;
}

inline PotentialSample eval_shot_points(const PotentialField& f, double r,
                                        const double* pts, std::size_t count) {
  PotentialSample s;
  const double inv_w = 1.0 / f.width;
  for (std::size_t i = 0; i < count; ++i)
    accumulate_bump((r - pts[i]) * inv_w, inv_w, f.amplitude, s);
  return s;
}

inline PotentialSample eval_trig_coeffs(const PotentialField& f, double r,
                                        const std::vector<double>& cos_amp,
                                        const std::vector<double>& sin_amp) {
  PotentialSample s;
  for (std::size_t j = 0; j < f.frequencies.size(); ++j) {
    const double w = f.frequencies[j];
    const double c = std::cos(w * r);
    const double sn = std::sin(w * r);
    const double a = cos_amp[j];
    const double b = sin_amp[j];
    s.value += a * c + b * sn;
    s.first += w * (b * c - a * sn);
    s.second += w * w * (-a * c - b * sn);
  }
  s.value *= f.amplitude;
  s.first *= f.amplitude;
  s.second *= f.amplitude;
  return s;
}

void trig_coeffs(const PotentialField& f, std::size_t k,
                 std::vector<double>& cos_amp, std::vector<double>& sin_amp) {
  const std::size_t J = f.frequencies.size();
  cos_amp.resize(J);
  sin_amp.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const auto z = rng::normal_pair(f.seed, rng::Domain::trig_modes, k, j);
    cos_amp[j] = f.mode_weights[j] * z.z0;
    sin_amp[j] = f.mode_weights[j] * z.z1;
  }
}

inline void cell_range(double r, double w, std::int64_t& m_lo, std::int64_t& m_hi) {
  m_lo = static_cast<std::int64_t>(std::floor(r - w));
  m_hi = static_cast<std::int64_t>(std::floor(r + w));
}

}  // namespace

PotentialField PotentialField::zero_field() { return {}; }

PotentialField PotentialField::shot(std::uint64_t seed, double amplitude,
                                    double lambda, double width) {
  if (!(lambda > 0.0) || !(width > 0.0) || !(amplitude >= 0.0))
    throw std::invalid_argument("shot noise: need lambda, width > 0 and amplitude >= 0");
  PotentialField f;
  f.kind = PotentialKind::shot_noise;
  f.seed = seed;
  f.amplitude = amplitude;
  f.lambda = lambda;
  f.width = width;
  return f;
}

PotentialField PotentialField::trig(std::uint64_t seed, double amplitude,
                                    std::vector<double> frequencies,
                                    std::vector<double> mode_weights) {
  if (frequencies.size() != mode_weights.size() || frequencies.empty())
    throw std::invalid_argument("random trig: need matching, nonempty mode lists");
  PotentialField f;
  f.kind = PotentialKind::random_trig;
  f.seed = seed;
  f.amplitude = amplitude;
  f.frequencies = std::move(frequencies);
  f.mode_weights = std::move(mode_weights);
  return f;
}

std::vector<double> shot_noise_cell_points(const PotentialField& field,
                                           std::size_t k, std::int64_t m) {
  if (k == 0) throw std::invalid_argument("potential rows start at k = 1");
  return cell_points(field, k, m);
}

std::uint64_t shot_noise_overflow_count() {
  return g_shot_overflow.load(std::memory_order_relaxed);
}

PotentialSample evaluate(const PotentialField& field, std::size_t k, double r) {
  if (k == 0) throw std::invalid_argument("potential rows start at k = 1");
  switch (field.kind) {
    case PotentialKind::zero:
      return {};
    case PotentialKind::shot_noise: {
      const double rs = r - static_cast<double>(k) * field.shear_velocity;
      std::int64_t m_lo, m_hi;
      cell_range(rs, field.width, m_lo, m_hi);
      PotentialSample s;
      const double inv_w = 1.0 / field.width;
      for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const auto pts = cell_points(field, k, m);
        for (double p : pts) accumulate_bump((rs - p) * inv_w, inv_w, field.amplitude, s);
      }
      return s;
    }
    case PotentialKind::random_trig: {
      const double rs = r - static_cast<double>(k) * field.shear_velocity;
      std::vector<double> ca, sa;
      trig_coeffs(field, k, ca, sa);
      return eval_trig_coeffs(field, rs, ca, sa);
    }
  }
  return {};
}

PotentialEvalContext::PotentialEvalContext(const PotentialField& field)
    : field_(field) {}

const PotentialEvalContext::ShotRow& PotentialEvalContext::shot_row(
    std::size_t k, std::int64_t m_lo, std::int64_t m_hi) {
  if (shot_rows_.size() < k) shot_rows_.resize(k);
  ShotRow& row = shot_rows_[k - 1];
  if (row.m_lo > m_lo || row.m_hi < m_hi) {
    row.m_lo = m_lo;
    row.m_hi = m_hi;
    row.points.clear();
    row.offsets.assign(1, 0);
    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
      const auto pts = cell_points(field_, k, m);
      row.points.insert(row.points.end(), pts.begin(), pts.end());
      row.offsets.push_back(row.points.size());
    }
  }
  return row;
}

PotentialSample PotentialEvalContext::eval(std::size_t k, double r) {
  if (k == 0) throw std::invalid_argument("potential rows start at k = 1");
  switch (field_.kind) {
    case PotentialKind::zero:
      return {};
    case PotentialKind::shot_noise: {
      const double rs = r - static_cast<double>(k) * field_.shear_velocity;
      std::int64_t m_lo, m_hi;
      cell_range(rs, field_.width, m_lo, m_hi);
      const ShotRow& row = shot_row(k, m_lo, m_hi);
      const std::size_t b = static_cast<std::size_t>(m_lo - row.m_lo);
      const std::size_t e = static_cast<std::size_t>(m_hi - row.m_lo) + 1;
      const std::size_t lo = row.offsets[b];
      const std::size_t hi = row.offsets[e];
      return eval_shot_points(field_, rs, row.points.data() + lo, hi - lo);
    }
    case PotentialKind::random_trig: {
      const double rs = r - static_cast<double>(k) * field_.shear_velocity;
      if (trig_rows_.size() < k) trig_rows_.resize(k);
      TrigRow& row = trig_rows_[k - 1];
      if (!row.ready) {
        trig_coeffs(field_, k, row.cos_amp, row.sin_amp);
        row.ready = true;
      }
      return eval_trig_coeffs(field_, rs, row.cos_amp, row.sin_amp);
    }
  }
  return {};
}

std::vector<double> drift(PotentialEvalContext& ctx, const PolymerState& x) {
  std::vector<double> d(x.n());
  kernels::active().laplacian(x.coords, x.right_boundary, d);
  if (ctx.field().kind != PotentialKind::zero) {
    for (std::size_t k = 1; k <= x.n(); ++k)
      d[k - 1] -= ctx.eval(k, x.coords[k - 1]).first;
  }
  return d;
}

std::vector<double> drift(const PotentialField& field, const PolymerState& x) {
  PotentialEvalContext ctx(field);
  return drift(ctx, x);
}

PotentialField shear_potential(const PotentialField& field, double v) {
  PotentialField f = field;
  f.shear_velocity += v;
  return f;
}

GrowthReport validate_growth(const PotentialField& field, std::size_t k_max,
                             double r_window) {
  GrowthReport rep;
  rep.row_sup.resize(k_max, 0.0);
  const std::uint64_t overflow_before = shot_noise_overflow_count();

  double step = 0.25;
  if (field.kind == PotentialKind::shot_noise) step = field.width / 8.0;
  if (field.kind == PotentialKind::random_trig) {
    double wmax = 0.0;
    for (double w : field.frequencies) wmax = std::max(wmax, std::fabs(w));
    if (wmax > 0.0) step = std::min(step, 2.0 * std::numbers::pi / (16.0 * wmax));
  }

  PotentialEvalContext ctx(field);
  for (std::size_t k = 1; k <= k_max; ++k) {
    double sup = 0.0;
    for (double r = -r_window; r <= r_window; r += step)
      sup = std::max(sup, std::fabs(ctx.eval(k, r).first));
    rep.row_sup[k - 1] = sup;
    const double envelope =
        1.0 + std::log(static_cast<double>(k)) + std::max(std::log(r_window), 0.0);
    const double c = sup / envelope;
    if (c > rep.fitted_constant) {
      rep.fitted_constant = c;
      rep.worst_row = k;
      rep.worst_sup = sup;
    }
  }
  rep.overflow_events = shot_noise_overflow_count() - overflow_before;
  return rep;
}

std::optional<FlatWindow> find_flat_window(const PotentialField& field,
                                           std::size_t n_probe, double half_width,
                                           double delta, double search_radius) {
  if (field.kind == PotentialKind::zero)
    return FlatWindow{0.0, 0.0, 0};

  std::uint64_t scanned = 0;
  const double stride = std::max(half_width / 2.0, 0.25);

  auto window_sup = [&](double center) {
    double sup = 0.0;
    if (field.kind == PotentialKind::shot_noise) {
      // Cheap pre-check: if no bump reaches into the window, f is exactly 0.
      bool empty = true;
      for (std::size_t k = 1; k <= n_probe && empty; ++k) {
        const double ck = center - static_cast<double>(k) * field.shear_velocity;
        std::int64_t m_lo, m_hi;
        cell_range(ck, half_width + field.width, m_lo, m_hi);
        for (std::int64_t m = m_lo; m <= m_hi && empty; ++m) {
          ++scanned;
          if (!cell_points(field, k, m).empty()) empty = false;
        }
      }
      if (empty) return 0.0;
    }
    const double step = field.kind == PotentialKind::shot_noise
                            ? field.width / 8.0
                            : std::max(half_width / 64.0, 1e-3);
    PotentialEvalContext ctx(field);
    for (std::size_t k = 1; k <= n_probe; ++k)
      for (double r = center - half_width; r <= center + half_width; r += step)
        sup = std::max(sup, std::fabs(ctx.eval(k, r).first));
    return sup;
  };

  std::optional<FlatWindow> best;
  for (double a = 0.0; a <= search_radius; a += stride) {
    for (double center : {a, -a}) {
      const double sup = window_sup(center);
      if (!best || sup < best->sup_f) best = FlatWindow{center, sup, scanned};
      if (sup <= delta) {
        best = FlatWindow{center, sup, scanned};
        return best;
      }
      if (a == 0.0) break;
    }
  }
  if (best) best->cells_scanned = scanned;
  if (best && best->sup_f <= delta) return best;
  return std::nullopt;
}

}  // namespace polymerlab
