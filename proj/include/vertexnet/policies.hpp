#pragma once

#include <random>
#include <vector>

#include "vertexnet/envs.hpp"
#include "vertexnet/nets.hpp"

// Policy heads. The vertex-network (VN) head turns trunk logits into
// softmax weights over the current safe polytope's vertices, so its
// action is a convex combination of safe points for any parameters and
// any exploration noise. The policy-network (PN) baseline maps a tanh
// output onto the actuator box and relies on a reward penalty instead.

namespace vn::policies {

using geom::Vec;

struct TooManyVertices : geom::GeomError {
  using geom::GeomError::GeomError;
};

struct VnPolicy {
  nets::MlpParams trunk;  // [state_dim, 256, 256, N], identity output
  int vertex_budget = 2;  // N
};

struct PnPolicy {
  nets::MlpParams trunk;  // [state_dim, 256, 256, action_dim], tanh output
  // Per-dimension box the tanh output is affinely mapped onto.
  std::vector<double> lo, hi;
  // Hovercraft: after the box clamp, rescale onto u1 + u2 <= cap.
  bool simplex_cap = false;
  double cap = 20.0;
};

VnPolicy make_vn_policy(const envs::AffineEnv& env, std::mt19937_64& rng);
PnPolicy make_pn_policy(const envs::AffineEnv& env, std::mt19937_64& rng);

// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(const std::vector<double>& logits);

// Cyclic repetition of the canonical vertex list to exactly n entries.
std::vector<Vec> pad_vertices(const geom::VertexPolytope& poly, int n);

struct VnAction {
  Vec action;
  std::vector<double> logits;   // after exploration noise
  std::vector<double> weights;  // softmax of the noisy logits
};

// Exploration noise is added to the logits before the softmax, so the
// action stays inside the polytope for every noise draw.
VnAction vn_act(const VnPolicy& policy, const Vec& state,
                const geom::VertexPolytope& poly, double noise_std,
                std::mt19937_64& rng);

// Chain rule of upstream (= dQ/da) through the convex combination and
// softmax into the trunk; vertices are constants.
nets::GradBundle vn_action_grad(const VnPolicy& policy, const Vec& state,
                                const geom::VertexPolytope& poly,
                                const Vec& upstream);

Vec pn_act(const PnPolicy& policy, const Vec& state, double noise_std,
           std::mt19937_64& rng);

// Greedy PN action (no noise) for a state given as a matrix column;
// used by the trainer's batched updates.
Vec pn_greedy(const PnPolicy& policy, const Vec& state);

// -100 * (magnitude by which the constrained coordinate exceeds its
// bound); 0 inside the safe set.
double pn_penalty(const envs::AffineEnv& env, const envs::EnvState& next);

}  // namespace vn::policies
