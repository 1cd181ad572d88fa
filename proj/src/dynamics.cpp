#include "polymerlab/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "polymerlab/kernels/kernels.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {
namespace {

constexpr char kTrajMagic[8] = {'P', 'L', 'T', 'R', 'A', 'J', '0', '1'};

void check_config(const PolymerState& x, const SdeConfig& cfg) {
  if (cfg.n != x.n()) throw std::invalid_argument("sde: config n != state n");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("sde: dt must be positive");
  if (!(cfg.temperature > 0.0))
    throw std::invalid_argument("sde: temperature must be positive");
  if (cfg.scheme == Scheme::explicit_em && cfg.enforce_step_condition &&
      cfg.dt * (2.0 + cfg.lipschitz_bound) > 1.0)
    throw std::invalid_argument(
        "sde: explicit scheme violates dt*(2 + L_f) <= 1; reduce dt or disable "
        "enforcement for a negative control");
}

bool all_finite(const PolymerState& x) {
  for (double v : x.coords)
    if (!std::isfinite(v)) return false;
  return true;
}

// Thomas elimination for (I - dt*Laplacian) x' = rhs with Dirichlet x'_0 = 0
// and frozen x'_{n+1} folded into rhs by the caller.  Constant diagonals.
void solve_semi_implicit(std::vector<double>& rhs, double dt,
                         std::vector<double>& scratch) {
  const std::size_t n = rhs.size();
  const double diag = 1.0 + 2.0 * dt;
  const double off = -dt;
  scratch.resize(n);
  double piv = diag;
  rhs[0] /= piv;
  for (std::size_t k = 1; k < n; ++k) {
    scratch[k] = off / piv;
    piv = diag - off * scratch[k];
    rhs[k] = (rhs[k] - off * rhs[k - 1]) / piv;
  }
  for (std::size_t k = n - 1; k-- > 0;) rhs[k] -= scratch[k + 1] * rhs[k + 1];
}

class Integrator {
 public:
  Integrator(const PolymerState& x0, const PotentialField& field,
             const NoisePath& path, const SdeConfig& cfg, std::int64_t j0)
      : cfg_(cfg), potential_(field), path_(path), cursor_(path, cfg.n, j0),
        x_(x0), next_(x0), sigma_(cfg.sigma()), f_(cfg.n, 0.0), dw_(cfg.n, 0.0) {
    zero_potential_ = field.kind == PotentialKind::zero;
  }

  void advance() {
    if (!zero_potential_) {
      for (std::size_t k = 1; k <= cfg_.n; ++k)
        f_[k - 1] = -potential_.eval(k, x_.coords[k - 1]).first;
    }
    if (sigma_ != 0.0) cursor_.fill(dw_);
    if (cfg_.scheme == Scheme::explicit_em) {
      kernels::active().em_step(x_.coords, x_.right_boundary, f_, dw_, cfg_.dt,
                                sigma_, next_.coords);
      x_.coords.swap(next_.coords);
    } else {
      // rhs = x + dt f + sigma dW, boundary term dt*right at k = n
      for (std::size_t k = 0; k < cfg_.n; ++k)
        x_.coords[k] = x_.coords[k] + cfg_.dt * f_[k] + sigma_ * dw_[k];
      x_.coords[cfg_.n - 1] += cfg_.dt * x_.right_boundary;
      solve_semi_implicit(x_.coords, cfg_.dt, next_.coords);
    }
  }

  const PolymerState& state() const { return x_; }

 private:
  const SdeConfig& cfg_;
  PotentialEvalContext potential_;
  const NoisePath& path_;
  NoiseCursor cursor_;
  PolymerState x_, next_;
  double sigma_;
  bool zero_potential_;
  std::vector<double> f_, dw_;
};

}  // namespace

PolymerState step(const PolymerState& x, PotentialEvalContext& potential,
                  const NoisePath& path, std::int64_t j, const SdeConfig& cfg) {
  check_config(x, cfg);
  PolymerState out = x;
  std::vector<double> f(cfg.n, 0.0), dw(cfg.n, 0.0);
  if (potential.field().kind != PotentialKind::zero)
    for (std::size_t k = 1; k <= cfg.n; ++k)
      f[k - 1] = -potential.eval(k, x.coords[k - 1]).first;
  const double sigma = cfg.sigma();
  if (sigma != 0.0)
    for (std::size_t k = 1; k <= cfg.n; ++k) dw[k - 1] = path.increment(k, j);
  if (cfg.scheme == Scheme::explicit_em) {
    kernels::active().em_step(x.coords, x.right_boundary, f, dw, cfg.dt, sigma,
                              out.coords);
  } else {
    std::vector<double> scratch;
    for (std::size_t k = 0; k < cfg.n; ++k)
      out.coords[k] = x.coords[k] + cfg.dt * f[k] + sigma * dw[k];
    out.coords[cfg.n - 1] += cfg.dt * x.right_boundary;
    solve_semi_implicit(out.coords, cfg.dt, scratch);
  }
  return out;
}

Trajectory evolve(const PolymerState& x0, const PotentialField& field,
                  const NoisePath& path, const SdeConfig& cfg, double t_start) {
  check_config(x0, cfg);
  if (cfg.t_end < 0.0)
    throw std::invalid_argument(
        "sde: backward integration is out of scope (t_end must be >= 0)");
  const std::int64_t j0 = path.steps(t_start);
  const std::int64_t count = path.steps(cfg.t_end);
  const std::int64_t stride =
      std::max<std::int64_t>(1, path.steps(cfg.snapshot_stride));

  Trajectory traj;
  traj.config = cfg;
  traj.potential_seed = field.seed;
  traj.noise_seed = path.seed();
  traj.initial_digest =
      rng::fnv1a(x0.coords.data(), x0.coords.size() * sizeof(double));
  traj.times.push_back(t_start);
  traj.states.push_back(x0);

  Integrator it(x0, field, path, cfg, j0);
  for (std::int64_t s = 0; s < count; ++s) {
    it.advance();
    const bool at_snapshot = ((s + 1) % stride == 0) || s + 1 == count;
    if (at_snapshot) {
      const double t = t_start + static_cast<double>(s + 1) * cfg.dt;
      if (!all_finite(it.state()))
        throw IntegrationError("sde: state became non-finite", traj.times.back(),
                               traj.states.back());
      traj.times.push_back(t);
      traj.states.push_back(it.state());
    }
  }
  return traj;
}

PolymerState evolve_final(const PolymerState& x0, const PotentialField& field,
                          const NoisePath& path, const SdeConfig& cfg,
                          double t_start) {
  check_config(x0, cfg);
  if (cfg.t_end < 0.0)
    throw std::invalid_argument(
        "sde: backward integration is out of scope (t_end must be >= 0)");
  const std::int64_t j0 = path.steps(t_start);
  const std::int64_t count = path.steps(cfg.t_end);
  Integrator it(x0, field, path, cfg, j0);
  PolymerState last = x0;
  double t_last = t_start;
  const std::int64_t check_every = 256;
  for (std::int64_t s = 0; s < count; ++s) {
    it.advance();
    if ((s + 1) % check_every == 0 || s + 1 == count) {
      if (!all_finite(it.state()))
        throw IntegrationError("sde: state became non-finite", t_last, last);
      last = it.state();
      t_last = t_start + static_cast<double>(s + 1) * cfg.dt;
    }
  }
  return it.state();
}

PolymerState heat_flow(const PolymerState& x0, double t, double dt, Scheme scheme) {
  if (t < 0.0)
    throw std::invalid_argument("heat_flow: backward time is out of scope");
  SdeConfig cfg;
  cfg.n = x0.n();
  cfg.dt = dt;
  cfg.t_end = t;
  cfg.scheme = scheme;
  cfg.sigma_override = 0.0;
  cfg.enforce_step_condition = scheme == Scheme::explicit_em;
  const NoisePath silent(0, dt);
  return evolve_final(x0, PotentialField::zero_field(), silent, cfg, 0.0);
}

PolymerState pullback_evolve(const PolymerState& x0, const PotentialField& field,
                             const NoisePath& path, const SdeConfig& cfg,
                             double t_start) {
  if (t_start > 0.0)
    throw std::invalid_argument("pullback_evolve: t_start must be <= 0");
  if (t_start == 0.0) return x0;
  SdeConfig c = cfg;
  c.t_end = -t_start;
  return evolve_final(x0, field, path, c, t_start);
}

void write_trajectory_csv(const std::string& file, const Trajectory& traj) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out << "t,k,x\n";
  char buf[64];
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    for (std::size_t k = 1; k <= traj.states[s].n(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g,%zu,%.17g\n", traj.times[s], k,
                    traj.states[s].coords[k - 1]);
      out << buf;
    }
  }
}

void write_trajectory_binary(const std::string& file, const Trajectory& traj) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file);
  out.write(kTrajMagic, sizeof(kTrajMagic));
  const std::uint64_t n = traj.states.empty() ? 0 : traj.states[0].n();
  const std::uint64_t count = traj.states.size();
  const double dt = traj.config.dt;
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&dt), sizeof(dt));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (std::size_t s = 0; s < count; ++s) {
    out.write(reinterpret_cast<const char*>(&traj.times[s]), sizeof(double));
    out.write(reinterpret_cast<const char*>(&traj.states[s].right_boundary),
              sizeof(double));
    out.write(reinterpret_cast<const char*>(traj.states[s].coords.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
  }
}

Trajectory read_trajectory_binary(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kTrajMagic, sizeof(magic)) != 0)
    throw std::runtime_error("bad trajectory magic in " + file);
  std::uint64_t n = 0, count = 0;
  double dt = 0.0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&dt), sizeof(dt));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  Trajectory traj;
  traj.config.n = n;
  traj.config.dt = dt;
  traj.times.resize(count);
  traj.states.resize(count);
  for (std::size_t s = 0; s < count; ++s) {
    traj.states[s].coords.resize(n);
    in.read(reinterpret_cast<char*>(&traj.times[s]), sizeof(double));
    in.read(reinterpret_cast<char*>(&traj.states[s].right_boundary),
            sizeof(double));
    in.read(reinterpret_cast<char*>(traj.states[s].coords.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated trajectory file " + file);
  return traj;
}

}  // namespace polymerlab
