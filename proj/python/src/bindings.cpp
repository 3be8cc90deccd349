#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "vertexnet/harness.hpp"

namespace py = pybind11;
using namespace vn;

namespace {

// Python-facing training entry point: returns per-episode metrics as a
// list of dicts; heavy lifting stays in C++.
py::list train_py(const std::string& env_name, const std::string& policy,
                  std::uint64_t seed, int episodes, int horizon,
                  double theta_bar) {
  const auto env = envs::make_env(envs::env_from_string(env_name), theta_bar,
                                  0.05, horizon);
  ddpg::TrainConfig cfg;
  cfg.episodes = episodes;
  const auto kind =
      policy == "vn" ? ddpg::PolicyKind::vn : ddpg::PolicyKind::pn;
  const auto result = ddpg::train(env, kind, cfg, seed);
  py::list out;
  for (const auto& m : result.metrics) {
    py::dict d;
    d["episode"] = m.episode;
    d["accumulated_reward"] = m.accumulated_reward;
    d["max_violation"] = m.max_violation;
    d["fallback_count"] = m.fallback_count;
    d["steps"] = m.steps;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Safe-set geometry, vertex policies and DDPG training";

  py::register_exception<geom::GeomError>(m, "GeomError");
  py::register_exception<harness::ConfigError>(m, "ConfigError");

  py::class_<geom::Halfplane>(m, "Halfplane")
      .def(py::init([](std::vector<double> normal, double offset) {
             return geom::Halfplane{std::move(normal), offset};
           }),
           py::arg("normal"), py::arg("offset"))
      .def_readonly("normal", &geom::Halfplane::normal)
      .def_readonly("offset", &geom::Halfplane::offset);

  py::class_<geom::VertexPolytope>(m, "VertexPolytope")
      .def(py::init([](std::vector<geom::Vec> vertices) {
             return geom::canonical_order(std::move(vertices));
           }),
           py::arg("vertices"))
      .def_readonly("dimension", &geom::VertexPolytope::dimension)
      .def_readonly("vertices", &geom::VertexPolytope::vertices);

  m.def(
      "clip_polygon",
      [](const geom::VertexPolytope& poly, const geom::Halfplane& hp)
          -> py::object {
        const auto out = geom::clip_polygon(poly, hp);
        if (!out) return py::none();
        return py::cast(*out);
      },
      py::arg("polygon"), py::arg("halfplane"),
      "Intersect a convex polygon with one halfplane; None when empty.");

  m.def(
      "convex_combination",
      [](const geom::VertexPolytope& poly, const std::vector<double>& w) {
        return geom::convex_combination(poly, w);
      },
      py::arg("polytope"), py::arg("weights"));

  m.def("softmax", &policies::softmax, py::arg("logits"));
  m.def("pad_vertices", &policies::pad_vertices, py::arg("polytope"),
        py::arg("n"));

  py::class_<envs::AffineEnv>(m, "Env")
      .def_property_readonly("name",
                             [](const envs::AffineEnv& e) {
                               return envs::to_string(e.name);
                             })
      .def_readonly("state_dim", &envs::AffineEnv::state_dim)
      .def_readonly("action_dim", &envs::AffineEnv::action_dim)
      .def_readonly("horizon", &envs::AffineEnv::horizon)
      .def_readonly("max_vertices", &envs::AffineEnv::max_vertices)
      .def("reset",
           [](const envs::AffineEnv& e, std::uint64_t seed) {
             std::mt19937_64 rng(seed);
             return envs::reset(e, rng).x;
           },
           py::arg("seed") = 0)
      .def("step",
           [](const envs::AffineEnv& e, const geom::Vec& x, int t,
              const geom::Vec& u) {
             const auto out = envs::step(e, {x, t}, u);
             return py::make_tuple(out.next_state.x, out.reward, out.violated,
                                   out.done);
           },
           py::arg("x"), py::arg("t"), py::arg("u"))
      .def("safe_action_polytope",
           [](const envs::AffineEnv& e, const geom::Vec& x) {
             const auto safe = envs::safe_action_polytope(e, {x, 0});
             return py::make_tuple(safe.polytope, safe.fallback_used);
           },
           py::arg("x"))
      .def("violation_metric",
           [](const envs::AffineEnv& e, const geom::Vec& x) {
             return envs::violation_metric(e, {x, 0});
           },
           py::arg("x"));

  m.def(
      "make_env",
      [](const std::string& name, double theta_bar, double delta,
         int horizon) {
        return envs::make_env(envs::env_from_string(name), theta_bar, delta,
                              horizon);
      },
      py::arg("name"), py::arg("theta_bar") = 0.25, py::arg("delta") = 0.05,
      py::arg("horizon") = 200);

  m.def("train", &train_py, py::arg("env"), py::arg("policy") = "vn",
        py::arg("seed") = 1, py::arg("episodes") = 200,
        py::arg("horizon") = 200, py::arg("theta_bar") = 0.25,
        "Run DDPG training; returns a list of per-episode metric dicts.");
}
