#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Structured pass/fail records emitted by the experiment harness.  Reports
// are append-only artifacts: they embed the full config, the code version and
// the verdict rule, so a run can be audited and replayed bit for bit.

namespace polymerlab {

inline constexpr const char* kCodeVersion = "0.1.0";

enum class Verdict { pass, fail, inconclusive };

const char* verdict_name(Verdict v);
int verdict_exit_code(Verdict v);  // pass 0, fail 1, inconclusive 2

struct Metric {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  static Metric exact(double v) { return {v, v, v}; }
  static Metric with_ci(double v, double lo, double hi) { return {v, lo, hi}; }
};

struct ExperimentReport {
  std::string experiment;
  std::string code_version = kCodeVersion;
  std::string config_json;        // canonical (sorted-key) config dump
  std::string config_digest;      // fnv-1a of config_json, hex
  std::vector<std::uint64_t> seeds;
  std::map<std::string, Metric> metrics;
  std::map<std::string, std::vector<double>> per_seed;  // raw mergeable series
  Verdict verdict = Verdict::inconclusive;
  std::string verdict_rule;       // the gate that produced the verdict
  std::vector<std::string> artifacts;
  std::vector<std::string> notes;
  double wall_time_s = 0.0;
};

std::string to_json(const ExperimentReport& rep);
ExperimentReport report_from_json(const std::string& text);
void write_report(const std::string& file, const ExperimentReport& rep);
ExperimentReport load_report(const std::string& file);

// Identical metric content (used by replay); wall time is ignored.
bool metrics_identical(const ExperimentReport& a, const ExperimentReport& b);

}  // namespace polymerlab
