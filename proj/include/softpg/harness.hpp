#pragma once

#include <optional>
#include <string>
#include <vector>

#include "softpg/config.hpp"
#include "softpg/env.hpp"
#include "softpg/policy.hpp"
#include "softpg/rng.hpp"

namespace softpg {

// One line of the metrics CSV, in column order.
struct MetricRow {
  long iteration = 0;
  long env_steps = 0;
  double mean_episode_return = 0.0;  // evaluation mean, external reward only
  double mean_entropy = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double alpha = 0.0;
  double wall_time_seconds = 0.0;
};

std::string metric_csv_header();
std::string metric_row_to_csv(const MetricRow& row);  // lossless %.17g reals
MetricRow parse_metric_row(const std::string& line);
std::vector<MetricRow> read_metrics_csv(const std::string& path);

struct EvalResult {
  double mean = 0.0;
  double stddev = 0.0;
};

// Deterministic-action evaluation (Gaussian mean / categorical argmax)
// counting external rewards only.
EvalResult evaluate(const Policy& policy, Env& env, int n_episodes, Rng& rng);

// Versioned binary policy file: magic+version, head descriptor, layer
// sizes, then all parameters in flatten order as 64-bit little-endian reals.
void save_policy(const std::string& path, const Policy& policy);
Policy load_policy(const std::string& path);

struct TrainResult {
  double final_eval_mean = 0.0;
  double final_eval_stddev = 0.0;
  long env_steps = 0;
  std::string metrics_path;
  std::string policy_path;
};

// Full training run: incremental CSV (rows at evaluation events), final
// policy serialization. Reads SOFTPG_THREADS for the rollout worker count.
TrainResult run_training(const RunConfig& cfg, const std::string& out_dir);

struct CompareSeedResult {
  std::uint64_t seed = 0;
  double final_a = 0.0;
  double final_b = 0.0;
};

struct CompareReport {
  std::vector<CompareSeedResult> seeds;
  double median_a = 0.0;
  double median_b = 0.0;
  double stddev_a = 0.0;
  double stddev_b = 0.0;
  double sign_test_p = 1.0;
  bool no_difference = false;  // sign test p > 0.05
  std::string to_json() const;
};

// Paired runs of two configs over seeds 0..n_seeds-1; per-run outputs land
// in <out_dir>/a_seed<k> and b_seed<k>, the report in <out_dir>/report.json.
CompareReport compare_runs(RunConfig cfg_a, RunConfig cfg_b, int n_seeds,
                           const std::string& out_dir);

// Text report for a tabular MDP: soft values, exact gradient routes, and
// the Monte-Carlo scheme-equivalence summary under the uniform-logits
// policy.
std::string oracle_report(const std::string& mdp_path, double alpha,
                          long n_samples = 100000, std::uint64_t seed = 0);

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  long points = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double seconds = 0.0;
  bool all_passed = false;
  std::string to_text() const;
};

// Finite-difference checks of every loss gradient at `points` random
// parameter points each; threshold 1e-5 max relative error.
GradCheckReport run_gradcheck_suite(int points = 100, std::uint64_t seed = 0);

}  // namespace softpg
