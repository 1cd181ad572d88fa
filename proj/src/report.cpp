#include "polymerlab/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace polymerlab {

using nlohmann::json;

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return 0;
    case Verdict::fail:
      return 1;
    case Verdict::inconclusive:
      return 2;
  }
  return 2;
}

namespace {

Verdict verdict_from_name(const std::string& s) {
  if (s == "pass") return Verdict::pass;
  if (s == "fail") return Verdict::fail;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw std::invalid_argument("unknown verdict: " + s);
}

}  // namespace

std::string to_json(const ExperimentReport& rep) {
  json j;
  j["experiment"] = rep.experiment;
  j["code_version"] = rep.code_version;
  j["config"] = json::parse(rep.config_json);
  j["config_digest"] = rep.config_digest;
  j["seeds"] = rep.seeds;
  json jm = json::object();
  for (const auto& [name, m] : rep.metrics)
    jm[name] = {{"value", m.value}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high}};
  j["metrics"] = jm;
  json jp = json::object();
  for (const auto& [name, v] : rep.per_seed) jp[name] = v;
  j["per_seed"] = jp;
  j["verdict"] = verdict_name(rep.verdict);
  j["verdict_rule"] = rep.verdict_rule;
  j["artifacts"] = rep.artifacts;
  j["notes"] = rep.notes;
  j["wall_time_s"] = rep.wall_time_s;
  return j.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentReport rep;
  rep.experiment = j.at("experiment").get<std::string>();
  rep.code_version = j.at("code_version").get<std::string>();
  rep.config_json = j.at("config").dump();
  rep.config_digest = j.at("config_digest").get<std::string>();
  rep.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& [name, m] : j.at("metrics").items())
    rep.metrics[name] = {m.at("value").get<double>(), m.at("ci_low").get<double>(),
                         m.at("ci_high").get<double>()};
  for (const auto& [name, v] : j.at("per_seed").items())
    rep.per_seed[name] = v.get<std::vector<double>>();
  rep.verdict = verdict_from_name(j.at("verdict").get<std::string>());
  rep.verdict_rule = j.at("verdict_rule").get<std::string>();
  rep.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  rep.notes = j.at("notes").get<std::vector<std::string>>();
  rep.wall_time_s = j.at("wall_time_s").get<double>();
  return rep;
}

void write_report(const std::string& file, const ExperimentReport& rep) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out << to_json(rep) << "\n";
}

ExperimentReport load_report(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

bool metrics_identical(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.metrics.size() != b.metrics.size()) return false;
  for (const auto& [name, m] : a.metrics) {
    const auto it = b.metrics.find(name);
    if (it == b.metrics.end()) return false;
    if (m.value != it->second.value || m.ci_low != it->second.ci_low ||
        m.ci_high != it->second.ci_high)
      return false;
  }
  if (a.per_seed != b.per_seed) return false;
  return a.verdict == b.verdict;
}

}  // namespace polymerlab
