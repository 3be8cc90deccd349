#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vertexnet/envs.hpp"
#include "vertexnet/policies.hpp"

// DDPG trainer: replay buffer, critic with target networks, and the
// deterministic policy gradient chained through either policy head.

namespace vn::ddpg {

using geom::Vec;

enum class PolicyKind { vn, pn };

struct Transition {
  Vec state;
  std::vector<double> logits;  // VN only: noisy logits behind the action
  Vec action;
  double reward = 0.0;
  Vec next_state;
  std::vector<Vec> vertex_set;       // VN only: padded to N
  std::vector<Vec> next_vertex_set;  // VN only: padded to N
  bool done = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return data_.size(); }

  // Uniform sample with replacement; requires size() >= n.
  std::vector<const Transition*> sample(std::size_t n,
                                        std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // FIFO eviction cursor
  std::vector<Transition> data_;
};

struct CriticPair {
  nets::MlpParams critic;  // input state||action -> scalar
  nets::MlpParams target_critic;
  nets::MlpParams target_actor;
  double tau = 0.005;
};

// Computes target-policy actions for a batch, one column per sample.
using TargetActionFn = std::function<nets::Matrix(
    const nets::MlpParams& target_actor,
    const std::vector<const Transition*>& batch)>;

// One Adam step on the critic toward y = r + gamma (1-done) Q_target;
// returns the batch MSE loss.
double critic_update(CriticPair& cp,
                     const std::vector<const Transition*>& batch, double gamma,
                     double lr, const TargetActionFn& target_action);

// One ascent step on mean Q(s, pi(s)); VN gradients flow through the
// safe layer with the stored vertex sets as constants.
void actor_update(policies::VnPolicy& policy, const nets::MlpParams& critic,
                  const std::vector<const Transition*>& batch, double lr);
void actor_update(policies::PnPolicy& policy, const nets::MlpParams& critic,
                  const std::vector<const Transition*>& batch, double lr);

// target <- tau * online + (1 - tau) * target for both target nets.
void soft_update(CriticPair& cp, const nets::MlpParams& online_actor,
                 double tau);

// Batched target-action heads for the two policy kinds.
nets::Matrix vn_target_actions(const nets::MlpParams& target_actor,
                               const std::vector<const Transition*>& batch);
TargetActionFn pn_target_actions(const policies::PnPolicy& shape);

struct TrainConfig {
  int episodes = 200;
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  std::size_t warmup = 1000;
  double noise_std = 0.3;
  double noise_decay = 0.995;
  // Multiplier on the reward stored in the replay buffer (reported
  // metrics always use the raw environment reward). Keeps critic
  // targets in a trainable range for large-magnitude rewards.
  double reward_scale = 1.0;
};

struct EpisodeMetrics {
  int episode = 0;
  double accumulated_reward = 0.0;
  double max_violation = 0.0;  // env-specific metric, all steps
  int fallback_count = 0;
  int steps = 0;
};

struct TrainResult {
  std::vector<EpisodeMetrics> metrics;
  PolicyKind kind = PolicyKind::vn;
  policies::VnPolicy vn;
  policies::PnPolicy pn;
  nets::MlpParams critic;
};

// Observation of one executed environment step, before it enters the
// replay buffer.
struct StepRecord {
  const Transition& transition;
  bool fallback_used = false;
};

// Full training loop: compute safe set, act, step, store, update.
// Deterministic for a fixed seed. on_episode, when given, is invoked
// after each finished episode (the harness streams metrics to disk so
// aborted runs keep their partial CSV); on_step after every step.
TrainResult train(const envs::AffineEnv& env, PolicyKind kind,
                  const TrainConfig& cfg, std::uint64_t seed,
                  const std::function<void(const EpisodeMetrics&)>&
                      on_episode = {},
                  const std::function<void(const StepRecord&)>& on_step = {});

}  // namespace vn::ddpg
