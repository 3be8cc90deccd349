#include "vertexnet/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace vn::envs {

namespace {

constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kSpring = 1.0;
constexpr double kStateTol = 1e-6;

geom::HalfplaneSet coord_band(int dim, int coord, double bound) {
  geom::Halfplane up{geom::Vec(dim, 0.0), bound};
  geom::Halfplane dn{geom::Vec(dim, 0.0), bound};
  up.normal[coord] = 1.0;
  dn.normal[coord] = -1.0;
  return {{up, dn}};
}

}  // namespace

std::string to_string(EnvName name) {
  switch (name) {
    case EnvName::pendulum: return "pendulum";
    case EnvName::mass_spring: return "mass_spring";
    case EnvName::hovercraft: return "hovercraft";
  }
  return "unknown";
}

EnvName env_from_string(const std::string& s) {
  if (s == "pendulum") return EnvName::pendulum;
  if (s == "mass_spring") return EnvName::mass_spring;
  if (s == "hovercraft") return EnvName::hovercraft;
  throw std::invalid_argument("unknown env: " + s);
}

AffineEnv make_env(EnvName name, double theta_bar, double delta, int horizon) {
  AffineEnv env;
  env.name = name;
  env.delta = delta;
  env.horizon = horizon;
  env.theta_bar = theta_bar;
  switch (name) {
    case EnvName::pendulum:
      env.state_dim = 2;
      env.action_dim = 1;
      env.max_vertices = 2;
      env.state_constraints = coord_band(2, 0, 1.0);  // theta in [-1, 1]
      env.actuator_constraints = {{{{1.0}, 15.0}, {{-1.0}, 15.0}}};
      env.actuator_polytope = {1, {{-15.0}, {15.0}}};
      break;
    case EnvName::mass_spring:
      env.state_dim = 2;
      env.action_dim = 1;
      env.max_vertices = 2;
      env.state_constraints = coord_band(2, 1, 1.0);  // v in [-1, 1]
      env.actuator_constraints = {{{{1.0}, 1.0}, {{-1.0}, 1.0}}};
      env.actuator_polytope = {1, {{-1.0}, {1.0}}};
      break;
    case EnvName::hovercraft:
      env.state_dim = 6;
      env.action_dim = 2;
      env.max_vertices = 5;
      env.state_constraints = coord_band(6, 4, theta_bar);
      env.actuator_constraints = {{{{-1.0, 0.0}, 0.0},
                                   {{0.0, -1.0}, 0.0},
                                   {{1.0, 1.0}, 20.0}}};
      env.actuator_polytope = {2, {{0.0, 0.0}, {20.0, 0.0}, {0.0, 20.0}}};
      break;
  }
  return env;
}

EnvState reset(const AffineEnv& env, std::mt19937_64& rng) {
  EnvState s;
  s.t = 0;
  switch (env.name) {
    case EnvName::pendulum: {
      std::uniform_real_distribution<double> theta(-1.0, 1.0);
      std::uniform_real_distribution<double> omega(-1.0, 1.0);
      const double th = theta(rng);
      s.x = {th, omega(rng)};
      break;
    }
    case EnvName::mass_spring: {
      std::uniform_real_distribution<double> pos(-2.0, 2.0);
      std::uniform_real_distribution<double> vel(-1.0, 1.0);
      const double p = pos(rng);
      s.x = {p, vel(rng)};
      break;
    }
    case EnvName::hovercraft:
      s.x = Vec(6, 0.0);
      break;
  }
  return s;
}

EnvState dynamics(const AffineEnv& env, const EnvState& s, const Vec& u) {
  const double d = env.delta;
  EnvState out;
  out.t = s.t + 1;
  switch (env.name) {
    case EnvName::pendulum: {
      const double th = s.x[0], om = s.x[1];
      const double grav = 3.0 * kGravity / (2.0 * kLength) * std::sin(th);
      const double gain = 3.0 / (kMass * kLength * kLength);
      out.x = {th + om * d + grav * d * d + gain * u[0] * d * d,
               om + grav * d + gain * u[0] * d};
      break;
    }
    case EnvName::mass_spring: {
      const double x = s.x[0], v = s.x[1];
      out.x = {x + d * v, -(kSpring / kMass) * d * x + v + (d / kMass) * u[0]};
      break;
    }
    case EnvName::hovercraft: {
      const double x = s.x[0], vx = s.x[1], y = s.x[2], vy = s.x[3];
      const double th = s.x[4], vth = s.x[5];
      const double thrust = u[0] + u[1];
      const double torque = u[0] - u[1];
      const double ax = std::sin(th) * thrust / kMass;
      const double ay = (std::cos(th) * thrust - kGravity) / kMass;
      const double ath = torque / kLength;
      out.x = {x + vx * d + 0.5 * ax * d * d,
               vx + ax * d,
               y + vy * d + 0.5 * ay * d * d,
               vy + ay * d,
               th + vth * d + 0.5 * ath * d * d,
               vth + ath * d};
      break;
    }
  }
  return out;
}

double reward(const AffineEnv& env, const EnvState& s, const Vec& u) {
  switch (env.name) {
    case EnvName::pendulum: {
      const double th = s.x[0], om = s.x[1];
      return -(th * th + 0.1 * om * om + 0.001 * u[0] * u[0]);
    }
    case EnvName::mass_spring: {
      const double x = s.x[0], v = s.x[1];
      return -(x * x + v * v);
    }
    case EnvName::hovercraft: {
      const double x = s.x[0], vx = s.x[1], y = s.x[2], vy = s.x[3];
      const double th = s.x[4], vth = s.x[5];
      const double dx = x - 5.0, dy = y - 5.0;
      return -dx * dx - dy * dy - th * th -
             0.1 * (vx * vx + vy * vy + vth * vth) -
             0.001 * (u[0] * u[0] + u[1] * u[1]);
    }
  }
  return 0.0;
}

SafeSet safe_action_polytope(const AffineEnv& env, const EnvState& s) {
  const double d = env.delta;
  switch (env.name) {
    case EnvName::pendulum: {
      // Invert theta' = a + b u for theta' in [-1, 1].
      const double a = s.x[0] + s.x[1] * d +
                       3.0 * kGravity / (2.0 * kLength) * std::sin(s.x[0]) * d * d;
      const double b = 3.0 * d * d / (kMass * kLength * kLength);
      const double lo = (-1.0 - a) / b, hi = (1.0 - a) / b;
      if (auto iv = geom::intersect_interval(lo, hi, -15.0, 15.0)) {
        return {{1, {{iv->lo}, {iv->hi}}}, false};
      }
      return {geom::closest_point_fallback(lo, hi, -15.0, 15.0), true};
    }
    case EnvName::mass_spring: {
      // Invert v' = v - (k/m) d x + (d/m) u for v' in [-1, 1].
      const double drift = s.x[1] - (kSpring / kMass) * d * s.x[0];
      const double lo = (-1.0 - drift) * kMass / d;
      const double hi = (1.0 - drift) * kMass / d;
      if (auto iv = geom::intersect_interval(lo, hi, -1.0, 1.0)) {
        return {{1, {{iv->lo}, {iv->hi}}}, false};
      }
      return {geom::closest_point_fallback(lo, hi, -1.0, 1.0), true};
    }
    case EnvName::hovercraft: {
      // Invert theta' = theta + vth d + (u1 - u2) d^2 / (2l) for
      // theta' in [-theta_bar, theta_bar]: a slab on u1 - u2.
      const double scale = 2.0 * kLength / (d * d);
      const double c_lo = (-env.theta_bar - s.x[4] - s.x[5] * d) * scale;
      const double c_hi = (env.theta_bar - s.x[4] - s.x[5] * d) * scale;
      const geom::Halfplane upper{{1.0, -1.0}, c_hi};
      const geom::Halfplane lower{{-1.0, 1.0}, -c_lo};
      auto clipped = geom::clip_polygon(env.actuator_polytope, upper);
      if (clipped) clipped = geom::clip_polygon(*clipped, lower);
      if (clipped) return {*clipped, false};
      const geom::HalfplaneSet slab{{upper, lower}};
      return {geom::closest_point_fallback(slab, env.actuator_polytope), true};
    }
  }
  throw std::logic_error("unreachable");
}

StepOutcome step(const AffineEnv& env, const EnvState& s, const Vec& u) {
  StepOutcome out;
  out.next_state = dynamics(env, s, u);
  out.reward = reward(env, s, u);
  out.violated = !geom::contains(env.state_constraints, out.next_state.x,
                                 kStateTol);
  out.done = out.next_state.t >= env.horizon;
  return out;
}

double violation_metric(const AffineEnv& env, const EnvState& s) {
  switch (env.name) {
    case EnvName::pendulum: return std::abs(s.x[0]);
    case EnvName::mass_spring: return std::abs(s.x[1]);
    case EnvName::hovercraft: return std::abs(s.x[4]);
  }
  return 0.0;
}

double violation_excess(const AffineEnv& env, const EnvState& s) {
  const double bound =
      (env.name == EnvName::hovercraft) ? env.theta_bar : 1.0;
  return std::max(0.0, violation_metric(env, s) - bound);
}

}  // namespace vn::envs
