#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "vertexnet/nets.hpp"

using namespace vn::nets;

namespace {

MlpParams random_params(const MlpSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_params(spec, rng);
}

// Central finite difference of scalar = output_grad . forward(x) with
// respect to every parameter; the oracle for backward().
double loss_of(const MlpParams& p, const Matrix& x, const Matrix& og) {
  return (og.array() * forward(p, x).array()).sum();
}

void check_against_fd(const MlpParams& params, const Matrix& x,
                      const Matrix& og, double tol) {
  Tape tape;
  forward(params, x, &tape);
  const GradBundle g = backward(params, tape, og);
  const double h = 1e-5;
  MlpParams probe = params;
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    for (Eigen::Index i = 0; i < params.w[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < params.w[l].cols(); ++j) {
        probe.w[l](i, j) = params.w[l](i, j) + h;
        const double up = loss_of(probe, x, og);
        probe.w[l](i, j) = params.w[l](i, j) - h;
        const double dn = loss_of(probe, x, og);
        probe.w[l](i, j) = params.w[l](i, j);
        const double fd = (up - dn) / (2 * h);
        const double denom = std::max({1.0, std::abs(fd),
                                       std::abs(g.dw[l](i, j))});
        CHECK(std::abs(fd - g.dw[l](i, j)) / denom <= tol);
      }
      probe.b[l](i) = params.b[l](i) + h;
      const double up = loss_of(probe, x, og);
      probe.b[l](i) = params.b[l](i) - h;
      const double dn = loss_of(probe, x, og);
      probe.b[l](i) = params.b[l](i);
      const double fd = (up - dn) / (2 * h);
      const double denom = std::max({1.0, std::abs(fd), std::abs(g.db[l](i))});
      CHECK(std::abs(fd - g.db[l](i)) / denom <= tol);
    }
  }
  // Input gradient against the same oracle.
  Matrix xp = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    xp(i, 0) = x(i, 0) + h;
    const double up = loss_of(params, xp, og);
    xp(i, 0) = x(i, 0) - h;
    const double dn = loss_of(params, xp, og);
    xp(i, 0) = x(i, 0);
    const double fd = (up - dn) / (2 * h);
    const double denom = std::max({1.0, std::abs(fd),
                                   std::abs(g.dinput(i, 0))});
    CHECK(std::abs(fd - g.dinput(i, 0)) / denom <= tol);
  }
}

}  // namespace

TEST_CASE("init_params shapes, bounds and determinism") {
  MlpSpec spec{{2, 256, 256, 1}};
  const auto p = random_params(spec, 1);
  REQUIRE(p.w.size() == 3);
  CHECK(p.w[0].rows() == 256);
  CHECK(p.w[0].cols() == 2);
  CHECK(p.w[1].rows() == 256);
  CHECK(p.w[1].cols() == 256);
  CHECK(p.w[2].rows() == 1);
  CHECK(p.w[2].cols() == 256);
  CHECK(p.b[2].size() == 1);

  // fan_in 256 -> entries within 1/sqrt(256) = 0.0625.
  CHECK(p.w[1].cwiseAbs().maxCoeff() <= 0.0625);
  CHECK(p.b[1].cwiseAbs().maxCoeff() == 0.0);

  const auto q = random_params(spec, 1);
  CHECK(p.w[0] == q.w[0]);
  CHECK(p.w[2] == q.w[2]);
}

TEST_CASE("forward basics") {
  MlpSpec spec{{3, 3}};
  std::mt19937_64 rng(0);
  auto p = init_params(spec, rng);
  p.w[0].setZero();
  Matrix x(3, 1);
  x << 1, 2, 3;
  CHECK(forward(p, x).isZero());

  p.w[0].setIdentity();
  CHECK(forward(p, x) == x);

  const auto a = forward(p, x);
  const auto b = forward(p, x);
  CHECK(a == b);  // purity

  p.w[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(forward(p, x), NonFinite);
}

TEST_CASE("backward zero upstream and linear case") {
  MlpSpec spec{{4, 8, 2}};
  auto p = random_params(spec, 3);
  Matrix x = Matrix::Random(4, 1);
  Tape tape;
  forward(p, x, &tape);
  const auto g = backward(p, tape, Matrix::Zero(2, 1));
  for (const auto& dw : g.dw) CHECK(dw.isZero());
  CHECK(g.dinput.isZero());

  // Single linear layer: input gradient is W^T og.
  MlpSpec lin{{3, 2}};
  auto pl = random_params(lin, 4);
  Matrix og = Matrix::Random(2, 1);
  Tape tl;
  forward(pl, Matrix::Random(3, 1), &tl);
  const auto gl = backward(pl, tl, og);
  CHECK((gl.dinput - pl.w[0].transpose() * og).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("backward matches central finite differences") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 10; ++iter) {
    MlpSpec spec{{4, 8, 8, 2}};
    auto p = random_params(spec, 100 + iter);
    const Matrix x = Matrix::Random(4, 1);
    const Matrix og = Matrix::Random(2, 1);
    check_against_fd(p, x, og, 1e-4);
  }
}

TEST_CASE("backward through tanh and softmax outputs") {
  MlpSpec tanh_spec{{3, 6, 2}, Activation::relu, Activation::tanh};
  check_against_fd(random_params(tanh_spec, 7), Matrix::Random(3, 1),
                   Matrix::Random(2, 1), 1e-4);

  MlpSpec sm_spec{{3, 6, 4}, Activation::relu, Activation::softmax};
  check_against_fd(random_params(sm_spec, 8), Matrix::Random(3, 1),
                   Matrix::Random(4, 1), 1e-4);
}

TEST_CASE("adam_step") {
  MlpSpec spec{{1, 1}};
  auto p = random_params(spec, 9);

  SUBCASE("zero gradient is the identity on weights") {
    auto before = p.w[0];
    GradBundle g;
    g.dw = {Matrix::Zero(1, 1)};
    g.db = {Vector::Zero(1)};
    adam_step(p, g, 0.001);
    CHECK(p.w[0] == before);
    CHECK(p.adam_steps == 1);
  }

  SUBCASE("first step magnitude equals the learning rate") {
    p.w[0](0, 0) = 0.0;
    GradBundle g;
    g.dw = {Matrix::Constant(1, 1, 1.0)};
    g.db = {Vector::Zero(1)};
    adam_step(p, g, 0.001);
    CHECK(p.w[0](0, 0) == doctest::Approx(-0.001).epsilon(1e-6));
  }

  SUBCASE("determinism") {
    auto q = p;
    GradBundle g;
    g.dw = {Matrix::Constant(1, 1, 0.3)};
    g.db = {Vector::Constant(1, -0.2)};
    adam_step(p, g, 0.01);
    adam_step(q, g, 0.01);
    CHECK(p.w[0] == q.w[0]);
    CHECK(p.b[0] == q.b[0]);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  MlpSpec spec{{3, 5, 2}, Activation::relu, Activation::tanh};
  auto p = random_params(spec, 11);
  // Touch the moments so they are nonzero too.
  GradBundle g;
  g.dw = {Matrix::Random(5, 3), Matrix::Random(2, 5)};
  g.db = {Vector::Random(5), Vector::Random(2)};
  adam_step(p, g, 0.01);

  std::ostringstream os;
  save_params(p, os);
  std::istringstream is(os.str());
  const auto q = load_params(is);

  CHECK(q.spec.layer_sizes == p.spec.layer_sizes);
  CHECK(q.adam_steps == p.adam_steps);
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    CHECK(q.w[l] == p.w[l]);
    CHECK(q.b[l] == p.b[l]);
    CHECK(q.mw[l] == p.mw[l]);
    CHECK(q.vw[l] == p.vw[l]);
  }
  std::ostringstream os2;
  save_params(q, os2);
  CHECK(os.str() == os2.str());
}
