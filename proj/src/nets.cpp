#include "vertexnet/nets.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace vn::nets {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

Matrix apply_activation(Activation act, const Matrix& z) {
  switch (act) {
    case Activation::identity:
      return z;
    case Activation::relu:
      return z.cwiseMax(0.0);
    case Activation::tanh:
      return z.array().tanh().matrix();
    case Activation::softmax: {
      Matrix out(z.rows(), z.cols());
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        Eigen::ArrayXd col = z.col(j).array() - z.col(j).maxCoeff();
        col = col.exp();
        out.col(j) = (col / col.sum()).matrix();
      }
      return out;
    }
  }
  return z;
}

// Maps an upstream gradient w.r.t. the activation output to a gradient
// w.r.t. the pre-activation, given the activation output.
Matrix activation_backward(Activation act, const Matrix& post,
                           const Matrix& grad) {
  switch (act) {
    case Activation::identity:
      return grad;
    case Activation::relu:
      return (post.array() > 0.0).select(grad, Matrix::Zero(grad.rows(),
                                                            grad.cols()));
    case Activation::tanh:
      return (grad.array() * (1.0 - post.array().square())).matrix();
    case Activation::softmax: {
      Matrix out(grad.rows(), grad.cols());
      for (Eigen::Index j = 0; j < grad.cols(); ++j) {
        const double dot = post.col(j).dot(grad.col(j));
        out.col(j) = post.col(j).array() * (grad.col(j).array() - dot);
      }
      return out;
    }
  }
  return grad;
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NonFinite(std::string("non-finite ") + what);
}

int activation_id(Activation a) { return static_cast<int>(a); }

Activation activation_from_id(int id) {
  if (id < 0 || id > 3) throw std::invalid_argument("bad activation id");
  return static_cast<Activation>(id);
}

}  // namespace

MlpParams init_params(const MlpSpec& spec, std::mt19937_64& rng) {
  if (spec.layer_sizes.size() < 2) {
    throw std::invalid_argument("MlpSpec needs at least two layers");
  }
  MlpParams p;
  p.spec = spec;
  const std::size_t layers = spec.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    }
    p.w.push_back(std::move(w));
    p.b.push_back(Vector::Zero(fan_out));
    p.mw.push_back(Matrix::Zero(fan_out, fan_in));
    p.vw.push_back(Matrix::Zero(fan_out, fan_in));
    p.mb.push_back(Vector::Zero(fan_out));
    p.vb.push_back(Vector::Zero(fan_out));
  }
  return p;
}

Matrix forward(const MlpParams& params, const Matrix& x, Tape* tape) {
  if (x.rows() != params.spec.layer_sizes.front()) {
    throw std::invalid_argument("forward: input width mismatch");
  }
  if (tape) {
    tape->input = x;
    tape->post.clear();
  }
  Matrix a = x;
  const std::size_t layers = params.w.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = params.w[l] * a;
    z.colwise() += params.b[l];
    const Activation act =
        (l + 1 == layers) ? params.spec.output : params.spec.hidden;
    a = apply_activation(act, z);
    check_finite(a, "activation");
    if (tape) tape->post.push_back(a);
  }
  return a;
}

GradBundle backward(const MlpParams& params, const Tape& tape,
                    const Matrix& output_grad) {
  const std::size_t layers = params.w.size();
  GradBundle g;
  g.dw.resize(layers);
  g.db.resize(layers);

  Matrix grad = output_grad;
  for (std::size_t l = layers; l-- > 0;) {
    const Activation act =
        (l + 1 == layers) ? params.spec.output : params.spec.hidden;
    const Matrix delta = activation_backward(act, tape.post[l], grad);
    const Matrix& below = (l == 0) ? tape.input : tape.post[l - 1];
    g.dw[l] = delta * below.transpose();
    g.db[l] = delta.rowwise().sum();
    check_finite(g.dw[l], "gradient");
    grad = params.w[l].transpose() * delta;
  }
  g.dinput = grad;
  check_finite(g.dinput, "input gradient");
  return g;
}

void adam_step(MlpParams& params, const GradBundle& grads, double lr) {
  params.adam_steps += 1;
  const double t = static_cast<double>(params.adam_steps);
  const double corr1 = 1.0 - std::pow(kBeta1, t);
  const double corr2 = 1.0 - std::pow(kBeta2, t);
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    params.mw[l] = kBeta1 * params.mw[l] + (1.0 - kBeta1) * grads.dw[l];
    params.vw[l] = kBeta2 * params.vw[l].array() +
                   (1.0 - kBeta2) * grads.dw[l].array().square();
    params.w[l].array() -= lr * (params.mw[l].array() / corr1) /
                           ((params.vw[l].array() / corr2).sqrt() + kEps);

    params.mb[l] = kBeta1 * params.mb[l] + (1.0 - kBeta1) * grads.db[l];
    params.vb[l] = kBeta2 * params.vb[l].array() +
                   (1.0 - kBeta2) * grads.db[l].array().square();
    params.b[l].array() -= lr * (params.mb[l].array() / corr1) /
                           ((params.vb[l].array() / corr2).sqrt() + kEps);
  }
}

namespace {

void write_block(std::ostream& os, const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      os << std::hexfloat << m(i, j) << '\n';
    }
  }
}

void read_block(std::istream& is, Matrix& m) {
  std::string tok;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      is >> tok;
      m(i, j) = std::strtod(tok.c_str(), nullptr);
    }
  }
}

}  // namespace

void save_params(const MlpParams& params, std::ostream& os) {
  os << "mlp " << params.spec.layer_sizes.size() << '\n';
  for (int s : params.spec.layer_sizes) os << s << ' ';
  os << '\n'
     << activation_id(params.spec.hidden) << ' '
     << activation_id(params.spec.output) << ' ' << params.adam_steps << '\n';
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    write_block(os, params.w[l]);
    write_block(os, params.b[l]);
    write_block(os, params.mw[l]);
    write_block(os, params.vw[l]);
    write_block(os, params.mb[l]);
    write_block(os, params.vb[l]);
  }
}

MlpParams load_params(std::istream& is) {
  std::string magic;
  std::size_t nsizes = 0;
  is >> magic >> nsizes;
  if (magic != "mlp" || nsizes < 2) {
    throw std::invalid_argument("bad checkpoint header");
  }
  MlpSpec spec;
  spec.layer_sizes.resize(nsizes);
  for (auto& s : spec.layer_sizes) is >> s;
  int hid = 0, out = 0;
  long steps = 0;
  is >> hid >> out >> steps;
  spec.hidden = activation_from_id(hid);
  spec.output = activation_from_id(out);

  MlpParams p;
  p.spec = spec;
  p.adam_steps = steps;
  for (std::size_t l = 0; l + 1 < nsizes; ++l) {
    const int rows = spec.layer_sizes[l + 1];
    const int cols = spec.layer_sizes[l];
    Matrix w(rows, cols), mw(rows, cols), vw(rows, cols);
    Matrix b(rows, 1), mb(rows, 1), vb(rows, 1);
    read_block(is, w);
    read_block(is, b);
    read_block(is, mw);
    read_block(is, vw);
    read_block(is, mb);
    read_block(is, vb);
    p.w.push_back(std::move(w));
    p.b.push_back(b.col(0));
    p.mw.push_back(std::move(mw));
    p.vw.push_back(std::move(vw));
    p.mb.push_back(mb.col(0));
    p.vb.push_back(vb.col(0));
  }
  if (!is) throw std::invalid_argument("truncated checkpoint");
  return p;
}

}  // namespace vn::nets
