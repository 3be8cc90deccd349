#include "vertexnet/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace vn::ddpg {

namespace {

using nets::Matrix;
using nets::Vector;

Matrix states_matrix(const std::vector<const Transition*>& batch,
                     bool next_state) {
  const auto dim = static_cast<Eigen::Index>(
      next_state ? batch[0]->next_state.size() : batch[0]->state.size());
  Matrix s(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Vec& x = next_state ? batch[j]->next_state : batch[j]->state;
    for (Eigen::Index i = 0; i < dim; ++i) s(i, j) = x[i];
  }
  return s;
}

std::vector<double> softmax_col(const Matrix& logits, Eigen::Index j) {
  std::vector<double> l(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) l[i] = logits(i, j);
  return policies::softmax(l);
}

}  // namespace

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<const Transition*> ReplayBuffer::sample(
    std::size_t n, std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&data_[pick(rng)]);
  return out;
}

nets::Matrix vn_target_actions(const nets::MlpParams& target_actor,
                               const std::vector<const Transition*>& batch) {
  const Matrix s = states_matrix(batch, true);
  const Matrix logits = nets::forward(target_actor, s);
  const auto adim =
      static_cast<Eigen::Index>(batch[0]->next_vertex_set[0].size());
  Matrix a = Matrix::Zero(adim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto w = softmax_col(logits, static_cast<Eigen::Index>(j));
    const auto& verts = batch[j]->next_vertex_set;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      for (Eigen::Index k = 0; k < adim; ++k) {
        a(k, static_cast<Eigen::Index>(j)) += w[i] * verts[i][k];
      }
    }
  }
  return a;
}

TargetActionFn pn_target_actions(const policies::PnPolicy& shape) {
  const std::vector<double> lo = shape.lo;
  const std::vector<double> hi = shape.hi;
  return [lo, hi](const nets::MlpParams& target_actor,
                  const std::vector<const Transition*>& batch) {
    const Matrix s = states_matrix(batch, true);
    Matrix out = nets::forward(target_actor, s);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        out(i, j) = lo[i] + 0.5 * (out(i, j) + 1.0) * (hi[i] - lo[i]);
      }
    }
    return out;
  };
}

double critic_update(CriticPair& cp,
                     const std::vector<const Transition*>& batch, double gamma,
                     double lr, const TargetActionFn& target_action) {
  const auto bsize = static_cast<Eigen::Index>(batch.size());
  const Matrix next_a = target_action(cp.target_actor, batch);
  const Matrix next_s = states_matrix(batch, true);
  Matrix next_in(next_s.rows() + next_a.rows(), bsize);
  next_in << next_s, next_a;
  const Matrix q_next = nets::forward(cp.target_critic, next_in);

  Matrix target(1, bsize);
  for (Eigen::Index j = 0; j < bsize; ++j) {
    const Transition& t = *batch[j];
    target(0, j) = t.reward + gamma * (t.done ? 0.0 : q_next(0, j));
  }

  const Matrix s = states_matrix(batch, false);
  const auto adim = static_cast<Eigen::Index>(batch[0]->action.size());
  Matrix in(s.rows() + adim, bsize);
  for (Eigen::Index j = 0; j < bsize; ++j) {
    in.col(j).head(s.rows()) = s.col(j);
    for (Eigen::Index k = 0; k < adim; ++k) {
      in(s.rows() + k, j) = batch[j]->action[k];
    }
  }
  nets::Tape tape;
  const Matrix q = nets::forward(cp.critic, in, &tape);
  const Matrix err = q - target;
  const double loss = err.array().square().mean();
  const Matrix dy = 2.0 * err / static_cast<double>(bsize);
  const auto grads = nets::backward(cp.critic, tape, dy);
  nets::adam_step(cp.critic, grads, lr);
  return loss;
}

void actor_update(policies::VnPolicy& policy, const nets::MlpParams& critic,
                  const std::vector<const Transition*>& batch, double lr) {
  const auto bsize = static_cast<Eigen::Index>(batch.size());
  const Matrix s = states_matrix(batch, false);
  nets::Tape actor_tape;
  const Matrix logits = nets::forward(policy.trunk, s, &actor_tape);

  const auto adim = static_cast<Eigen::Index>(batch[0]->action.size());
  Matrix in(s.rows() + adim, bsize);
  std::vector<std::vector<double>> weights(batch.size());
  for (Eigen::Index j = 0; j < bsize; ++j) {
    weights[j] = softmax_col(logits, j);
    const auto& verts = batch[j]->vertex_set;
    Vector a = Vector::Zero(adim);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      for (Eigen::Index k = 0; k < adim; ++k) {
        a(k) += weights[j][i] * verts[i][k];
      }
    }
    in.col(j).head(s.rows()) = s.col(j);
    in.col(j).tail(adim) = a;
  }

  nets::Tape critic_tape;
  nets::forward(critic, in, &critic_tape);
  const Matrix dy = Matrix::Constant(1, bsize, 1.0 / static_cast<double>(bsize));
  const auto critic_grads = nets::backward(critic, critic_tape, dy);

  Matrix dlogits(logits.rows(), bsize);
  for (Eigen::Index j = 0; j < bsize; ++j) {
    const auto& verts = batch[j]->vertex_set;
    std::vector<double> vu(verts.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      double d = 0.0;
      for (Eigen::Index k = 0; k < adim; ++k) {
        d += verts[i][k] * critic_grads.dinput(s.rows() + k, j);
      }
      vu[i] = d;
      mean += weights[j][i] * d;
    }
    for (std::size_t i = 0; i < verts.size(); ++i) {
      // Negated: adam_step descends, we ascend mean Q.
      dlogits(static_cast<Eigen::Index>(i), j) =
          -weights[j][i] * (vu[i] - mean);
    }
  }
  const auto grads = nets::backward(policy.trunk, actor_tape, dlogits);
  nets::adam_step(policy.trunk, grads, lr);
}

void actor_update(policies::PnPolicy& policy, const nets::MlpParams& critic,
                  const std::vector<const Transition*>& batch, double lr) {
  const auto bsize = static_cast<Eigen::Index>(batch.size());
  const Matrix s = states_matrix(batch, false);
  nets::Tape actor_tape;
  const Matrix out = nets::forward(policy.trunk, s, &actor_tape);

  const auto adim = static_cast<Eigen::Index>(policy.lo.size());
  Matrix in(s.rows() + adim, bsize);
  for (Eigen::Index j = 0; j < bsize; ++j) {
    in.col(j).head(s.rows()) = s.col(j);
    for (Eigen::Index k = 0; k < adim; ++k) {
      in(s.rows() + k, j) =
          policy.lo[k] + 0.5 * (out(k, j) + 1.0) * (policy.hi[k] - policy.lo[k]);
    }
  }
  nets::Tape critic_tape;
  nets::forward(critic, in, &critic_tape);
  const Matrix dy = Matrix::Constant(1, bsize, 1.0 / static_cast<double>(bsize));
  const auto critic_grads = nets::backward(critic, critic_tape, dy);

  Matrix dout(adim, bsize);
  for (Eigen::Index j = 0; j < bsize; ++j) {
    for (Eigen::Index k = 0; k < adim; ++k) {
      dout(k, j) = -critic_grads.dinput(s.rows() + k, j) * 0.5 *
                   (policy.hi[k] - policy.lo[k]);
    }
  }
  const auto grads = nets::backward(policy.trunk, actor_tape, dout);
  nets::adam_step(policy.trunk, grads, lr);
}

void soft_update(CriticPair& cp, const nets::MlpParams& online_actor,
                 double tau) {
  auto blend = [tau](const nets::MlpParams& online, nets::MlpParams& target) {
    for (std::size_t l = 0; l < online.w.size(); ++l) {
      target.w[l] = tau * online.w[l] + (1.0 - tau) * target.w[l];
      target.b[l] = tau * online.b[l] + (1.0 - tau) * target.b[l];
    }
  };
  blend(cp.critic, cp.target_critic);
  blend(online_actor, cp.target_actor);
}

TrainResult train(const envs::AffineEnv& env, PolicyKind kind,
                  const TrainConfig& cfg, std::uint64_t seed,
                  const std::function<void(const EpisodeMetrics&)>&
                      on_episode,
                  const std::function<void(const StepRecord&)>& on_step) {
  std::mt19937_64 rng(seed);
  TrainResult result;
  result.kind = kind;
  result.vn = policies::make_vn_policy(env, rng);
  result.pn = policies::make_pn_policy(env, rng);

  nets::MlpSpec critic_spec;
  critic_spec.layer_sizes = {env.state_dim + env.action_dim, 256, 256, 1};
  CriticPair cp;
  cp.critic = nets::init_params(critic_spec, rng);
  cp.target_critic = cp.critic;
  cp.target_actor =
      (kind == PolicyKind::vn) ? result.vn.trunk : result.pn.trunk;
  cp.tau = cfg.tau;

  const TargetActionFn target_fn = (kind == PolicyKind::vn)
                                       ? TargetActionFn(vn_target_actions)
                                       : pn_target_actions(result.pn);

  ReplayBuffer buffer(cfg.buffer_capacity);
  double noise = cfg.noise_std;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    envs::EnvState state = envs::reset(env, rng);
    EpisodeMetrics m;
    m.episode = ep;
    m.max_violation = envs::violation_metric(env, state);

    envs::SafeSet safe;
    if (kind == PolicyKind::vn) safe = envs::safe_action_polytope(env, state);

    bool done = false;
    while (!done) {
      Transition t;
      t.state = state.x;
      if (kind == PolicyKind::vn) {
        if (safe.fallback_used) m.fallback_count += 1;
        const auto act =
            policies::vn_act(result.vn, state.x, safe.polytope, noise, rng);
        t.action = act.action;
        t.logits = act.logits;
        t.vertex_set =
            policies::pad_vertices(safe.polytope, result.vn.vertex_budget);
      } else {
        t.action = policies::pn_act(result.pn, state.x, noise, rng);
      }

      const envs::StepOutcome outcome = envs::step(env, state, t.action);
      t.next_state = outcome.next_state.x;
      t.done = outcome.done;
      t.reward = outcome.reward;
      if (kind == PolicyKind::pn) {
        t.reward += policies::pn_penalty(env, outcome.next_state);
      }
      t.reward *= cfg.reward_scale;

      envs::SafeSet next_safe;
      if (kind == PolicyKind::vn) {
        next_safe = envs::safe_action_polytope(env, outcome.next_state);
        t.next_vertex_set =
            policies::pad_vertices(next_safe.polytope, result.vn.vertex_budget);
      }

      m.accumulated_reward += outcome.reward;
      m.max_violation = std::max(
          m.max_violation, envs::violation_metric(env, outcome.next_state));
      m.steps += 1;
      done = outcome.done;

      if (on_step) on_step(StepRecord{t, safe.fallback_used});
      buffer.push(std::move(t));
      if (buffer.size() >= cfg.warmup &&
          buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        const auto batch = buffer.sample(cfg.batch_size, rng);
        critic_update(cp, batch, cfg.gamma, cfg.critic_lr, target_fn);
        if (kind == PolicyKind::vn) {
          actor_update(result.vn, cp.critic, batch, cfg.actor_lr);
          soft_update(cp, result.vn.trunk, cfg.tau);
        } else {
          actor_update(result.pn, cp.critic, batch, cfg.actor_lr);
          soft_update(cp, result.pn.trunk, cfg.tau);
        }
      }

      state = outcome.next_state;
      safe = next_safe;
    }
    noise *= cfg.noise_decay;
    result.metrics.push_back(m);
    if (on_episode) on_episode(m);
  }
  result.critic = cp.critic;
  return result;
}

}  // namespace vn::ddpg
