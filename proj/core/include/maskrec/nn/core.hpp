#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "maskrec/rng.hpp"

namespace maskrec::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using ParamVisitor = std::function<void(const std::string&, Mat<S>*)>;

template <typename S>
void trunc_normal_init(Mat<S>& m, Rng& rng, double std_dev) {
  std::normal_distribution<double> dist(0.0, std_dev);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = dist(rng);
      while (std::abs(v) > 2.0 * std_dev) v = dist(rng);
      m(i, j) = static_cast<S>(v);
    }
}

template <typename S>
void xavier_init(Mat<S>& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<S>(dist(rng));
}

// y = x W + b over token rows.
template <typename S>
struct Linear {
  Mat<S> W;  // [in, out]
  Mat<S> b;  // [1, out]

  Linear() = default;
  Linear(int in, int out) { resize(in, out); }

  void resize(int in, int out) {
    W = Mat<S>::Zero(in, out);
    b = Mat<S>::Zero(1, out);
  }

  void init(Rng& rng) { xavier_init(W, rng); }

  void visit(const std::string& prefix, const ParamVisitor<S>& f) {
    f(prefix + ".W", &W);
    f(prefix + ".b", &b);
  }

  Mat<S> forward(const Mat<S>& x) const {
    Mat<S> y = x * W;
    y.rowwise() += b.row(0);
    return y;
  }

  // Accumulates parameter gradients into the twin; returns dx.
  Mat<S> backward(const Mat<S>& x, const Mat<S>& dy, Linear<S>& grad) const {
    grad.W.noalias() += x.transpose() * dy;
    grad.b.row(0) += dy.colwise().sum();
    return dy * W.transpose();
  }
};

template <typename S>
struct LayerNorm {
  Mat<S> gamma;  // [1, dim]
  Mat<S> beta;   // [1, dim]
  static constexpr S kEps = static_cast<S>(1e-6);

  struct Cache {
    Mat<S> xhat;
    Mat<S> inv_std;  // [rows, 1]
  };

  LayerNorm() = default;
  explicit LayerNorm(int dim) { resize(dim); }

  void resize(int dim) {
    gamma = Mat<S>::Ones(1, dim);
    beta = Mat<S>::Zero(1, dim);
  }

  void visit(const std::string& prefix, const ParamVisitor<S>& f) {
    f(prefix + ".gamma", &gamma);
    f(prefix + ".beta", &beta);
  }

  Mat<S> forward(const Mat<S>& x, Cache& c) const {
    const Eigen::Index rows = x.rows(), dim = x.cols();
    c.xhat.resize(rows, dim);
    c.inv_std.resize(rows, 1);
    Mat<S> y(rows, dim);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const S mean = x.row(i).mean();
      const S var = (x.row(i).array() - mean).square().mean();
      const S inv = S(1) / std::sqrt(var + kEps);
      c.inv_std(i, 0) = inv;
      c.xhat.row(i) = (x.row(i).array() - mean) * inv;
      y.row(i) = c.xhat.row(i).cwiseProduct(gamma.row(0)) + beta.row(0);
    }
    return y;
  }

  Mat<S> backward(const Cache& c, const Mat<S>& dy, LayerNorm<S>& grad) const {
    const Eigen::Index rows = dy.rows(), dim = dy.cols();
    Mat<S> dx(rows, dim);
    for (Eigen::Index i = 0; i < rows; ++i) {
      grad.gamma.row(0) += dy.row(i).cwiseProduct(c.xhat.row(i));
      grad.beta.row(0) += dy.row(i);
      const auto dyh = dy.row(i).cwiseProduct(gamma.row(0));
      const S m1 = dyh.mean();
      const S m2 = dyh.cwiseProduct(c.xhat.row(i)).mean();
      dx.row(i) =
          (dyh.array() - m1 - c.xhat.row(i).array() * m2).matrix() * c.inv_std(i, 0);
    }
    return dx;
  }
};

template <typename S>
inline S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x * S(0.7071067811865476)));
}

template <typename S>
inline S gelu_grad(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x * S(0.7071067811865476)));
  const S pdf = S(0.3989422804014327) * std::exp(S(-0.5) * x * x);
  return cdf + x * pdf;
}

// ---------------------------------------------------------------------------
// Optimizers. Parameters and their gradient twins are bound once as
// parallel lists; step() consumes and then zeroes the gradients.

template <typename S>
struct ParamBinding {
  std::vector<Mat<S>*> params;
  std::vector<Mat<S>*> grads;
};

template <typename S, typename Model>
ParamBinding<S> bind_params(Model& model, Model& grad_twin) {
  ParamBinding<S> b;
  model.visit_params("m", [&](const std::string&, Mat<S>* p) { b.params.push_back(p); });
  grad_twin.visit_params("m", [&](const std::string&, Mat<S>* p) { b.grads.push_back(p); });
  return b;
}

template <typename S>
struct AdamW {
  double lr = 1.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
  long step_count = 0;
  std::vector<Mat<S>> m, v;

  void attach(const ParamBinding<S>& b) {
    m.clear();
    v.clear();
    for (Mat<S>* p : b.params) {
      m.push_back(Mat<S>::Zero(p->rows(), p->cols()));
      v.push_back(Mat<S>::Zero(p->rows(), p->cols()));
    }
  }

  void step(const ParamBinding<S>& b, double lr_now) {
    ++step_count;
    const S b1 = static_cast<S>(beta1), b2 = static_cast<S>(beta2);
    const S bc1 = static_cast<S>(1.0 - std::pow(beta1, step_count));
    const S bc2 = static_cast<S>(1.0 - std::pow(beta2, step_count));
    const S lr_s = static_cast<S>(lr_now), wd = static_cast<S>(weight_decay);
    const S eps_s = static_cast<S>(eps);
    for (std::size_t i = 0; i < b.params.size(); ++i) {
      Mat<S>& p = *b.params[i];
      Mat<S>& g = *b.grads[i];
      m[i] = b1 * m[i] + (S(1) - b1) * g;
      v[i] = b2 * v[i] + (S(1) - b2) * g.cwiseProduct(g);
      const auto mhat = (m[i] / bc1).array();
      const auto vhat = (v[i] / bc2).array();
      p.array() -= lr_s * (mhat / (vhat.sqrt() + eps_s)) + lr_s * wd * p.array();
      g.setZero();
    }
  }
};

template <typename S>
struct SgdMomentum {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<Mat<S>> velocity;

  void attach(const ParamBinding<S>& b) {
    velocity.clear();
    for (Mat<S>* p : b.params) velocity.push_back(Mat<S>::Zero(p->rows(), p->cols()));
  }

  void step(const ParamBinding<S>& b, double lr_now) {
    const S mu = static_cast<S>(momentum), wd = static_cast<S>(weight_decay);
    const S lr_s = static_cast<S>(lr_now);
    for (std::size_t i = 0; i < b.params.size(); ++i) {
      Mat<S>& p = *b.params[i];
      Mat<S>& g = *b.grads[i];
      g += wd * p;
      velocity[i] = mu * velocity[i] + g;
      p -= lr_s * velocity[i];
      g.setZero();
    }
  }
};

inline double cosine_lr(double base, long step, long total_steps) {
  if (total_steps <= 1) return base;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps - 1);
  return base * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace maskrec::nn
