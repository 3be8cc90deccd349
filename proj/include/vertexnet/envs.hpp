#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "vertexnet/geometry.hpp"

// The three benchmark affine control systems: inverted pendulum,
// mass-spring damper and hovercraft tracking. Each exposes explicit
// Euler dynamics x' = f(x) + H(x) u, a quadratic reward, polytopic
// state/actuator constraint sets and the per-step safe action set
// U_t = S_t n U used by the vertex policy.

namespace vn::envs {

using geom::Vec;

enum class EnvName { pendulum, mass_spring, hovercraft };

std::string to_string(EnvName name);
EnvName env_from_string(const std::string& s);

struct AffineEnv {
  EnvName name = EnvName::pendulum;
  int state_dim = 2;
  int action_dim = 1;
  double delta = 0.05;   // discretization step, seconds
  int horizon = 200;     // steps per episode
  double theta_bar = 0.25;  // hovercraft tilt bound, unused elsewhere
  geom::HalfplaneSet state_constraints;     // the set X
  geom::HalfplaneSet actuator_constraints;  // the set U (H-rep)
  geom::VertexPolytope actuator_polytope;   // the set U (V-rep)
  int max_vertices = 2;  // N: softmax width of the vertex policy
};

struct EnvState {
  Vec x;
  int t = 0;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool violated = false;
  bool done = false;
};

struct SafeSet {
  geom::VertexPolytope polytope;
  bool fallback_used = false;
};

AffineEnv make_env(EnvName name, double theta_bar = 0.25, double delta = 0.05,
                   int horizon = 200);

EnvState reset(const AffineEnv& env, std::mt19937_64& rng);

EnvState dynamics(const AffineEnv& env, const EnvState& s, const Vec& u);

double reward(const AffineEnv& env, const EnvState& s, const Vec& u);

// Vertices of U_t = S_t n U for the current state. fallback_used is set
// when the intersection is empty and the closest-point rule fired.
SafeSet safe_action_polytope(const AffineEnv& env, const EnvState& s);

StepOutcome step(const AffineEnv& env, const EnvState& s, const Vec& u);

// The constrained coordinate's magnitude: |theta| (pendulum), |v|
// (mass-spring), |tilt| (hovercraft).
double violation_metric(const AffineEnv& env, const EnvState& s);

// Magnitude by which the constrained coordinate exceeds its bound.
double violation_excess(const AffineEnv& env, const EnvState& s);

}  // namespace vn::envs
