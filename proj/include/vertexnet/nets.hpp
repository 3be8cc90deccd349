#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <vector>

// Minimal feed-forward network with reverse-mode gradients and Adam.
// All entry points take matrices whose columns are samples, so a batch
// is one pair of GEMMs per layer; single-sample use is a 1-column
// matrix.

namespace vn::nets {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Activation { relu, identity, tanh, softmax };

struct MlpSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output widths
  Activation hidden = Activation::relu;
  Activation output = Activation::identity;
};

struct MlpParams {
  MlpSpec spec;
  std::vector<Matrix> w;  // w[l]: layer_sizes[l+1] x layer_sizes[l]
  std::vector<Vector> b;
  // Adam accumulators.
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long adam_steps = 0;
};

struct Tape {
  Matrix input;
  std::vector<Matrix> post;  // activation outputs per layer
};

struct GradBundle {
  std::vector<Matrix> dw;
  std::vector<Vector> db;
  Matrix dinput;
};

// Weights ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
MlpParams init_params(const MlpSpec& spec, std::mt19937_64& rng);

// Columns of x are samples. Fills `tape` when given. Throws NonFinite
// if any activation is NaN/Inf.
Matrix forward(const MlpParams& params, const Matrix& x, Tape* tape = nullptr);

// Gradients of sum_j output_grad(:,j) . output(:,j) w.r.t. parameters
// and the input.
GradBundle backward(const MlpParams& params, const Tape& tape,
                    const Matrix& output_grad);

// One Adam descent step (beta1=0.9, beta2=0.999, eps=1e-8). Callers
// ascending pass a negated gradient.
void adam_step(MlpParams& params, const GradBundle& grads, double lr);

// Bit-exact textual round trip (hexfloat values).
void save_params(const MlpParams& params, std::ostream& os);
MlpParams load_params(std::istream& is);

}  // namespace vn::nets
