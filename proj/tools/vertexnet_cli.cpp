#include <CLI11.hpp>
#include <iostream>

#include "vertexnet/harness.hpp"

// Command-line front end: train / eval / compare.

int main(int argc, char** argv) {
  CLI::App app{"Safe RL with vertex-network policies"};
  app.require_subcommand(1);

  vn::harness::ExperimentConfig cfg;
  std::string config_path;

  auto* train = app.add_subcommand("train", "Train a policy and write metrics");
  train->add_option("--config", config_path, "key=value config file");
  train->add_option("--env", cfg.env, "pendulum|mass_spring|hovercraft");
  train->add_option("--policy", cfg.policy, "vn|pn");
  train->add_option("--seed", cfg.seed);
  train->add_option("--episodes", cfg.episodes);
  train->add_option("--horizon", cfg.horizon);
  train->add_option("--theta-bar", cfg.theta_bar, "hovercraft tilt bound");
  train->add_option("--gamma", cfg.gamma);
  train->add_option("--tau", cfg.tau);
  train->add_option("--actor-lr", cfg.actor_lr);
  train->add_option("--critic-lr", cfg.critic_lr);
  train->add_option("--batch-size", cfg.batch_size);
  train->add_option("--warmup", cfg.warmup);
  train->add_option("--noise-std", cfg.noise_std);
  train->add_option("--noise-decay", cfg.noise_decay);
  train->add_option("--reward-scale", cfg.reward_scale,
                    "reward multiplier for stored transitions");
  train->add_option("--out", cfg.out_dir, "output directory");

  std::string checkpoint, eval_out = ".";
  auto* eval = app.add_subcommand("eval", "Greedy rollout of a checkpoint");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--out", eval_out);

  std::vector<std::string> run_dirs;
  std::string compare_out = ".";
  auto* compare = app.add_subcommand("compare", "Summarize completed runs");
  compare->add_option("dirs", run_dirs, "run directories")->required();
  compare->add_option("--out", compare_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      vn::harness::ExperimentConfig resolved;
      if (!config_path.empty()) {
        resolved = vn::harness::load_config(config_path);
      }
      // CLI flags override file values.
      if (config_path.empty()) {
        resolved = cfg;
      } else {
        auto override_if = [&](const std::string& flag, auto member_ptr) {
          if (train->count(flag) > 0) resolved.*member_ptr = cfg.*member_ptr;
        };
        override_if("--env", &vn::harness::ExperimentConfig::env);
        override_if("--policy", &vn::harness::ExperimentConfig::policy);
        override_if("--seed", &vn::harness::ExperimentConfig::seed);
        override_if("--episodes", &vn::harness::ExperimentConfig::episodes);
        override_if("--horizon", &vn::harness::ExperimentConfig::horizon);
        override_if("--theta-bar", &vn::harness::ExperimentConfig::theta_bar);
        override_if("--gamma", &vn::harness::ExperimentConfig::gamma);
        override_if("--tau", &vn::harness::ExperimentConfig::tau);
        override_if("--actor-lr", &vn::harness::ExperimentConfig::actor_lr);
        override_if("--critic-lr", &vn::harness::ExperimentConfig::critic_lr);
        override_if("--batch-size", &vn::harness::ExperimentConfig::batch_size);
        override_if("--warmup", &vn::harness::ExperimentConfig::warmup);
        override_if("--noise-std", &vn::harness::ExperimentConfig::noise_std);
        override_if("--noise-decay",
                    &vn::harness::ExperimentConfig::noise_decay);
        override_if("--reward-scale",
                    &vn::harness::ExperimentConfig::reward_scale);
        override_if("--out", &vn::harness::ExperimentConfig::out_dir);
      }
      return vn::harness::run_train(resolved);
    }
    if (eval->parsed()) {
      return vn::harness::run_eval(checkpoint, eval_out);
    }
    if (compare->parsed()) {
      return vn::harness::run_compare(run_dirs, compare_out);
    }
  } catch (const vn::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const vn::harness::MissingRun& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
