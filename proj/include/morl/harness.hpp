#pragma once

#include "morl/metrics.hpp"

#include <map>
#include <string>
#include <vector>

namespace morl::harness {

/// Flat typed key=value run configuration. Keys are case-sensitive; `#`
/// starts a comment; values keep internal whitespace.
class Config {
 public:
  static Config from_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  /// Applies a `key=value` CLI override.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  scalar_t get_real(const std::string& key) const;
  scalar_t get_real(const std::string& key, scalar_t fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;

  /// Sorted `key=value` lines; the canonical form behind the config hash.
  std::string canonical() const;

  /// FNV-1a hash of the canonical serialization (platform-stable).
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

/// Floats in CSV artifacts carry 17 significant digits.
std::string format_real(scalar_t v);

struct RunResult {
  metrics::EvalMetrics final_metrics;
  std::string out_dir;
  std::uint64_t config_hash = 0;
};

/// Executes one training run from a validated config: builds the environment,
/// learner and oracle fronts, trains with periodic evaluation, and writes
/// resolved_config.txt, eval_metrics.csv, solutions_<step>.csv and a
/// checkpoint into the output directory.
RunResult run_train(const Config& cfg);

struct MethodSummary {
  std::string method;
  int runs = 0;
  scalar_t hv_mean = 0, hv_std = 0;
  scalar_t precision_mean = 0, precision_std = 0;
  scalar_t recall_mean = 0, recall_std = 0;
  scalar_t f1_mean = 0, f1_std = 0;
  /// Median over runs of the first step with recall = 1; infinity if any
  /// contributing run never reaches the full front.
  scalar_t median_steps_to_full_front = 0;
};

/// Aggregates completed run directories per method (mean and sample standard
/// deviation of final metrics, steps-to-first-full-front) and writes a
/// long-format CSV keyed by (method, seed, step, metric). Incomplete
/// directories are skipped with a warning on stderr.
std::vector<MethodSummary> compare_runs(const std::vector<std::string>& run_dirs,
                                        const std::string& long_csv_path);

/// Ad-hoc hypervolume of a CSV of points (two columns, optional header).
scalar_t hypervolume_from_csv(const std::string& path, const RewardVector& ref);

}  // namespace morl::harness
