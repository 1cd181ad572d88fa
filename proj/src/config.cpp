#include "polymerlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "polymerlab/rng.hpp"

namespace polymerlab {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(context + ": unknown key \"" + key + "\"");
  }
}

std::string digest_hex(const std::string& text) {
  const std::uint64_t h = rng::fnv1a(text.data(), text.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

PotentialField parse_potential(const json& j) {
  reject_unknown_keys(j,
                      {"kind", "seed", "amplitude", "lambda", "width",
                       "frequencies", "mode_weights", "shear_velocity"},
                      "potential");
  const std::string kind = j.at("kind").get<std::string>();
  PotentialField f;
  if (kind == "zero") {
    f = PotentialField::zero_field();
  } else if (kind == "shot_noise") {
    f = PotentialField::shot(j.at("seed").get<std::uint64_t>(),
                             j.value("amplitude", 1.0), j.value("lambda", 1.0),
                             j.value("width", 1.0));
  } else if (kind == "random_trig") {
    std::vector<double> freq = j.value("frequencies", std::vector<double>{});
    std::vector<double> wts = j.value("mode_weights", std::vector<double>{});
    if (freq.empty()) {
      // default spectrum with decaying weights
      for (int m = 1; m <= 8; ++m) {
        freq.push_back(0.4 * m);
        wts.push_back(1.0 / m);
      }
    }
    f = PotentialField::trig(j.at("seed").get<std::uint64_t>(),
                             j.value("amplitude", 1.0), std::move(freq),
                             std::move(wts));
  } else {
    throw ConfigError("potential.kind must be zero, shot_noise or random_trig");
  }
  f.shear_velocity = j.value("shear_velocity", 0.0);
  return f;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "explicit_em") return Scheme::explicit_em;
  if (s == "semi_implicit_laplacian") return Scheme::semi_implicit_laplacian;
  throw ConfigError("sde.scheme must be explicit_em or semi_implicit_laplacian");
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  reject_unknown_keys(
      j, {"experiment", "output_dir", "seeds", "potential", "noise", "sde", "params"},
      "config");
  RunConfig cfg;
  if (!j.contains("experiment"))
    throw ConfigError("config: missing \"experiment\"");
  cfg.experiment = j.at("experiment").get<std::string>();
  cfg.output_dir = j.value("output_dir", "polymerlab_out/" + cfg.experiment);

  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.is_number_unsigned() || s.is_number_integer()) {
      const std::int64_t count = s.get<std::int64_t>();
      if (count < 1 || count > 1000000)
        throw ConfigError("config: seeds count out of range");
      for (std::int64_t i = 0; i < count; ++i)
        cfg.seeds.push_back(static_cast<std::uint64_t>(i + 1));
    } else {
      cfg.seeds = s.get<std::vector<std::uint64_t>>();
      if (cfg.seeds.empty()) throw ConfigError("config: empty seed list");
    }
  } else {
    for (std::uint64_t i = 1; i <= 16; ++i) cfg.seeds.push_back(i);
  }

  cfg.potential = j.contains("potential") ? parse_potential(j.at("potential"))
                                          : PotentialField::zero_field();
  cfg.sde.n = 128;
  cfg.sde.t_end = 10.0;

  if (j.contains("noise")) {
    reject_unknown_keys(j.at("noise"), {"seed", "dt"}, "noise");
    cfg.noise_seed = j.at("noise").value("seed", 0ull);
    if (j.at("noise").contains("dt"))
      cfg.sde.dt = j.at("noise").at("dt").get<double>();
  }

  if (j.contains("sde")) {
    const auto& s = j.at("sde");
    reject_unknown_keys(s,
                        {"n", "dt", "temperature", "scheme", "t_end",
                         "snapshot_stride", "lipschitz_bound",
                         "enforce_step_condition", "sigma_override",
                         "allow_sigma_beta_mismatch"},
                        "sde");
    cfg.sde.n = s.value("n", std::size_t{128});
    if (s.contains("dt")) {
      const double sde_dt = s.at("dt").get<double>();
      if (j.contains("noise") && j.at("noise").contains("dt") &&
          sde_dt != cfg.sde.dt)
        throw ConfigError("sde.dt must equal noise.dt (shared grid)");
      cfg.sde.dt = sde_dt;
    }
    cfg.sde.temperature = s.value("temperature", 1.0);
    cfg.sde.scheme = parse_scheme(s.value("scheme", std::string("explicit_em")));
    cfg.sde.t_end = s.value("t_end", 10.0);
    cfg.sde.snapshot_stride = s.value("snapshot_stride", 1.0);
    cfg.sde.lipschitz_bound = s.value("lipschitz_bound", -1.0);
    cfg.sde.enforce_step_condition = s.value("enforce_step_condition", true);
    cfg.allow_sigma_beta_mismatch = s.value("allow_sigma_beta_mismatch", false);
    if (s.contains("sigma_override")) {
      cfg.sde.sigma_override = s.at("sigma_override").get<double>();
      const double tied = std::sqrt(2.0 * cfg.sde.temperature);
      if (std::fabs(cfg.sde.sigma_override - tied) > 1e-12 &&
          !cfg.allow_sigma_beta_mismatch)
        throw ConfigError(
            "sde.sigma_override breaks sigma^2 = 2/beta; set "
            "allow_sigma_beta_mismatch to run a negative control");
    }
  }
  if (cfg.sde.lipschitz_bound < 0.0) {
    // default hint: curvature of one bump times a small stack allowance
    cfg.sde.lipschitz_bound =
        cfg.potential.kind == PotentialKind::shot_noise
            ? 24.0 * cfg.potential.amplitude /
                  (cfg.potential.width * cfg.potential.width)
            : 0.0;
  }

  if (!(cfg.sde.dt > 0.0)) throw ConfigError("sde.dt must be positive");
  if (cfg.sde.n < 1) throw ConfigError("sde.n must be >= 1");

  cfg.params = j.value("params", json::object());

  // Canonical dump (nlohmann objects iterate in sorted key order).
  json canon = j;
  canon["output_dir"] = cfg.output_dir;
  cfg.canonical_json = canon.dump();
  cfg.digest = digest_hex(cfg.canonical_json);
  return cfg;
}

RunConfig load_run_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_run_config(j);
}

}  // namespace polymerlab
