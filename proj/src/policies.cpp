#include "vertexnet/policies.hpp"

#include <algorithm>
#include <cmath>

namespace vn::policies {

namespace {

constexpr int kHidden = 256;
constexpr double kPenaltyCoeff = 100.0;

nets::Vector to_vector(const Vec& v) {
  return Eigen::Map<const nets::Vector>(v.data(),
                                        static_cast<Eigen::Index>(v.size()));
}

}  // namespace

VnPolicy make_vn_policy(const envs::AffineEnv& env, std::mt19937_64& rng) {
  nets::MlpSpec spec;
  spec.layer_sizes = {env.state_dim, kHidden, kHidden, env.max_vertices};
  spec.output = nets::Activation::identity;
  return VnPolicy{nets::init_params(spec, rng), env.max_vertices};
}

PnPolicy make_pn_policy(const envs::AffineEnv& env, std::mt19937_64& rng) {
  nets::MlpSpec spec;
  spec.layer_sizes = {env.state_dim, kHidden, kHidden, env.action_dim};
  spec.output = nets::Activation::tanh;
  PnPolicy p{nets::init_params(spec, rng), {}, {}};
  if (env.name == envs::EnvName::hovercraft) {
    p.lo = {0.0, 0.0};
    p.hi = {20.0, 20.0};
    p.simplex_cap = true;
    p.cap = 20.0;
  } else {
    const double bound = (env.name == envs::EnvName::pendulum) ? 15.0 : 1.0;
    p.lo = {-bound};
    p.hi = {bound};
  }
  return p;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& w : out) w /= sum;
  return out;
}

std::vector<Vec> pad_vertices(const geom::VertexPolytope& poly, int n) {
  const std::size_t count = poly.vertices.size();
  if (count > static_cast<std::size_t>(n)) {
    throw TooManyVertices("pad_vertices: polytope exceeds vertex budget");
  }
  std::vector<Vec> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(poly.vertices[i % count]);
  return out;
}

VnAction vn_act(const VnPolicy& policy, const Vec& state,
                const geom::VertexPolytope& poly, double noise_std,
                std::mt19937_64& rng) {
  const nets::Matrix out = nets::forward(policy.trunk, to_vector(state));
  VnAction act;
  act.logits.resize(policy.vertex_budget);
  for (int i = 0; i < policy.vertex_budget; ++i) act.logits[i] = out(i, 0);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (double& l : act.logits) l += noise(rng);
  }
  act.weights = softmax(act.logits);
  const auto padded = pad_vertices(poly, policy.vertex_budget);
  act.action = geom::convex_combination(
      geom::VertexPolytope{poly.dimension, padded}, act.weights);
  return act;
}

nets::GradBundle vn_action_grad(const VnPolicy& policy, const Vec& state,
                                const geom::VertexPolytope& poly,
                                const Vec& upstream) {
  nets::Tape tape;
  const nets::Matrix out = nets::forward(policy.trunk, to_vector(state), &tape);
  std::vector<double> logits(policy.vertex_budget);
  for (int i = 0; i < policy.vertex_budget; ++i) logits[i] = out(i, 0);
  const auto weights = softmax(logits);
  const auto padded = pad_vertices(poly, policy.vertex_budget);

  // d(action)/d(weights) is the padded-vertex matrix; chain through the
  // softmax Jacobian: dL_i = s_i (v_i - sum_j s_j v_j), v_i = V_i . up.
  std::vector<double> vu(padded.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < padded.size(); ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < upstream.size(); ++k) {
      d += padded[i][k] * upstream[k];
    }
    vu[i] = d;
    mean += weights[i] * d;
  }
  nets::Matrix dlogits(policy.vertex_budget, 1);
  for (int i = 0; i < policy.vertex_budget; ++i) {
    dlogits(i, 0) = weights[i] * (vu[i] - mean);
  }
  return nets::backward(policy.trunk, tape, dlogits);
}

Vec pn_greedy(const PnPolicy& policy, const Vec& state) {
  const nets::Matrix out = nets::forward(policy.trunk, to_vector(state));
  Vec u(policy.lo.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = policy.lo[i] + 0.5 * (out(static_cast<Eigen::Index>(i), 0) + 1.0) *
                              (policy.hi[i] - policy.lo[i]);
  }
  return u;
}

Vec pn_act(const PnPolicy& policy, const Vec& state, double noise_std,
           std::mt19937_64& rng) {
  Vec u = pn_greedy(policy, state);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] += noise(rng) * (policy.hi[i] - policy.lo[i]) * 0.5;
    }
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = std::clamp(u[i], policy.lo[i], policy.hi[i]);
  }
  if (policy.simplex_cap) {
    const double total = u[0] + u[1];
    if (total > policy.cap) {
      const double scale = policy.cap / total;
      u[0] *= scale;
      u[1] *= scale;
    }
  }
  return u;
}

double pn_penalty(const envs::AffineEnv& env, const envs::EnvState& next) {
  return -kPenaltyCoeff * envs::violation_excess(env, next);
}

}  // namespace vn::policies
