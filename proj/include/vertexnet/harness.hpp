#pragma once

#include <string>
#include <vector>

#include "vertexnet/ddpg.hpp"

// Experiment harness: resolved configuration, training/evaluation runs
// with on-disk artifacts (metrics.csv, config.echo, checkpoint,
// trajectory.csv) and cross-run comparison (summary.csv + SVG curves).

namespace vn::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingRun : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string env = "pendulum";
  std::string policy = "vn";
  std::uint64_t seed = 1;
  int episodes = 200;
  int horizon = 200;
  double delta = 0.05;
  double theta_bar = 0.25;
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  std::size_t warmup = 1000;
  double noise_std = 0.3;
  double noise_decay = 0.995;
  double reward_scale = 1.0;
  std::string out_dir = ".";
};

// key=value lines; '#' starts a comment. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path,
                             ExperimentConfig base = {});
void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value);
void validate(const ExperimentConfig& cfg);

std::string render_config(const ExperimentConfig& cfg);

// Full-precision decimal that round-trips a double.
std::string format_double(double v);

// Trains and writes metrics.csv, config.echo and checkpoint.txt under
// cfg.out_dir. Returns 0, or 3 when training aborts on non-finite
// values (partial metrics.csv is retained).
int run_train(const ExperimentConfig& cfg);

// Loads a checkpoint, runs one greedy episode and writes
// trajectory.csv under out_dir.
int run_eval(const std::string& checkpoint_path, const std::string& out_dir);

struct RunSummary {
  std::string dir;
  std::uint64_t seed = 0;
  std::string env, policy;
  double mean_reward_first = 0.0;  // first 10% of episodes
  double mean_reward_last = 0.0;   // last 10% of episodes
  double max_violation = 0.0;
  long total_fallbacks = 0;
  int episodes = 0;
};

RunSummary summarize_run(const std::string& dir);

// Writes summary.csv, reward_curve.svg and violation_curve.svg under
// out_dir (one series per run).
int run_compare(const std::vector<std::string>& run_dirs,
                const std::string& out_dir);

// metrics.csv helpers shared with the tests.
void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const ddpg::EpisodeMetrics& m);
std::vector<ddpg::EpisodeMetrics> read_metrics(const std::string& path);

}  // namespace vn::harness
