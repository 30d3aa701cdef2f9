#pragma once

#include <vector>

#include "maskrec/nn/core.hpp"

namespace maskrec::nn {

// Feature maps are stored channels-first as [C, H*W] row-major matrices.

inline int conv_out_size(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

template <typename S>
void im2col(const Mat<S>& x, int h, int w, int kernel, int stride, int pad, Mat<S>& col) {
  const int cin = static_cast<int>(x.rows());
  const int ho = conv_out_size(h, kernel, stride, pad);
  const int wo = conv_out_size(w, kernel, stride, pad);
  col.resize(static_cast<Eigen::Index>(cin) * kernel * kernel,
             static_cast<Eigen::Index>(ho) * wo);
  for (int c = 0; c < cin; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const Eigen::Index row = (static_cast<Eigen::Index>(c) * kernel + ky) * kernel + kx;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          const bool y_ok = iy >= 0 && iy < h;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            const Eigen::Index out_idx = static_cast<Eigen::Index>(oy) * wo + ox;
            col(row, out_idx) = (y_ok && ix >= 0 && ix < w)
                                    ? x(c, static_cast<Eigen::Index>(iy) * w + ix)
                                    : S(0);
          }
        }
      }
    }
  }
}

template <typename S>
void col2im(const Mat<S>& col, int cin, int h, int w, int kernel, int stride, int pad,
            Mat<S>& x) {
  const int ho = conv_out_size(h, kernel, stride, pad);
  const int wo = conv_out_size(w, kernel, stride, pad);
  x = Mat<S>::Zero(cin, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < cin; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const Eigen::Index row = (static_cast<Eigen::Index>(c) * kernel + ky) * kernel + kx;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= w) continue;
            x(c, static_cast<Eigen::Index>(iy) * w + ix) +=
                col(row, static_cast<Eigen::Index>(oy) * wo + ox);
          }
        }
      }
    }
  }
}

template <typename S>
struct Conv2d {
  int cin = 0, cout = 0, kernel = 1, stride = 1, pad = 0;
  Mat<S> W;  // [cout, cin*k*k]
  Mat<S> b;  // [cout, 1]

  struct Cache {
    Mat<S> x;  // input feature map, needed to recompute im2col in backward
    int h = 0, w = 0;
  };

  Conv2d() = default;
  Conv2d(int cin_, int cout_, int kernel_, int stride_, int pad_) {
    resize(cin_, cout_, kernel_, stride_, pad_);
  }

  void resize(int cin_, int cout_, int kernel_, int stride_, int pad_) {
    cin = cin_;
    cout = cout_;
    kernel = kernel_;
    stride = stride_;
    pad = pad_;
    W = Mat<S>::Zero(cout, static_cast<Eigen::Index>(cin) * kernel * kernel);
    b = Mat<S>::Zero(cout, 1);
  }

  void init(Rng& rng) {
    // He-style fan-in scaling.
    const double std_dev = std::sqrt(2.0 / (static_cast<double>(cin) * kernel * kernel));
    trunc_normal_init(W, rng, std_dev);
  }

  void visit(const std::string& prefix, const ParamVisitor<S>& f) {
    f(prefix + ".W", &W);
    f(prefix + ".b", &b);
  }

  Mat<S> forward(const Mat<S>& x, int h, int w, Cache& c) const {
    c.x = x;
    c.h = h;
    c.w = w;
    Mat<S> col;
    im2col(x, h, w, kernel, stride, pad, col);
    Mat<S> y = W * col;
    y.colwise() += b.col(0);
    return y;
  }

  Mat<S> backward(const Cache& c, const Mat<S>& dy, Conv2d<S>& grad) const {
    Mat<S> col;
    im2col(c.x, c.h, c.w, kernel, stride, pad, col);
    grad.W.noalias() += dy * col.transpose();
    grad.b.col(0) += dy.rowwise().sum();
    const Mat<S> dcol = W.transpose() * dy;
    Mat<S> dx;
    col2im(dcol, cin, c.h, c.w, kernel, stride, pad, dx);
    return dx;
  }
};

// Per-sample group normalization over [C, HW]; no running statistics, so
// train and eval behave identically and inner-loop clones stay stateless.
template <typename S>
struct GroupNorm {
  int channels = 0, groups = 1;
  Mat<S> gamma;  // [C, 1]
  Mat<S> beta;   // [C, 1]
  static constexpr S kEps = static_cast<S>(1e-5);

  struct Cache {
    Mat<S> xhat;
    std::vector<S> inv_std;  // per group
  };

  GroupNorm() = default;
  GroupNorm(int channels_, int groups_) { resize(channels_, groups_); }

  void resize(int channels_, int groups_) {
    channels = channels_;
    groups = groups_;
    gamma = Mat<S>::Ones(channels, 1);
    beta = Mat<S>::Zero(channels, 1);
  }

  void visit(const std::string& prefix, const ParamVisitor<S>& f) {
    f(prefix + ".gamma", &gamma);
    f(prefix + ".beta", &beta);
  }

  Mat<S> forward(const Mat<S>& x, Cache& c) const {
    const Eigen::Index hw = x.cols();
    const int cg = channels / groups;
    c.xhat.resize(x.rows(), hw);
    c.inv_std.assign(static_cast<std::size_t>(groups), S(0));
    Mat<S> y(x.rows(), hw);
    for (int g = 0; g < groups; ++g) {
      const auto xg = x.middleRows(g * cg, cg);
      const S mean = xg.mean();
      const S var = (xg.array() - mean).square().mean();
      const S inv = S(1) / std::sqrt(var + kEps);
      c.inv_std[static_cast<std::size_t>(g)] = inv;
      c.xhat.middleRows(g * cg, cg) = ((xg.array() - mean) * inv).matrix();
      for (int i = 0; i < cg; ++i) {
        const int ch = g * cg + i;
        y.row(ch) = c.xhat.row(ch) * gamma(ch, 0);
        y.row(ch).array() += beta(ch, 0);
      }
    }
    return y;
  }

  Mat<S> backward(const Cache& c, const Mat<S>& dy, GroupNorm<S>& grad) const {
    const Eigen::Index hw = dy.cols();
    const int cg = channels / groups;
    Mat<S> dx(dy.rows(), hw);
    Mat<S> dyh(cg, hw);
    for (int g = 0; g < groups; ++g) {
      for (int i = 0; i < cg; ++i) {
        const int ch = g * cg + i;
        grad.gamma(ch, 0) += dy.row(ch).cwiseProduct(c.xhat.row(ch)).sum();
        grad.beta(ch, 0) += dy.row(ch).sum();
        dyh.row(i) = dy.row(ch) * gamma(ch, 0);
      }
      const auto xg_hat = c.xhat.middleRows(g * cg, cg);
      const S m1 = dyh.mean();
      const S m2 = dyh.cwiseProduct(xg_hat).mean();
      dx.middleRows(g * cg, cg) =
          ((dyh.array() - m1 - xg_hat.array() * m2) * c.inv_std[static_cast<std::size_t>(g)])
              .matrix();
    }
    return dx;
  }
};

template <typename S>
Mat<S> relu(const Mat<S>& x) {
  return x.cwiseMax(S(0));
}

template <typename S>
Mat<S> relu_backward(const Mat<S>& y, const Mat<S>& dy) {
  return (y.array() > S(0)).select(dy, Mat<S>::Zero(dy.rows(), dy.cols()));
}

// Bilinear resize of a [C, HW] feature map; the sparse interpolation weights
// are precomputed so the backward pass is the exact transpose.
template <typename S>
struct BilinearResize {
  int in_h = 0, in_w = 0, out_h = 0, out_w = 0;
  struct Tap {
    int src;
    S weight;
  };
  std::vector<std::array<Tap, 4>> taps;  // per output pixel

  BilinearResize() = default;
  BilinearResize(int in_h_, int in_w_, int out_h_, int out_w_) {
    build(in_h_, in_w_, out_h_, out_w_);
  }

  void build(int in_h_, int in_w_, int out_h_, int out_w_) {
    in_h = in_h_;
    in_w = in_w_;
    out_h = out_h_;
    out_w = out_w_;
    taps.resize(static_cast<std::size_t>(out_h) * out_w);
    const double sy = static_cast<double>(in_h) / out_h;
    const double sx = static_cast<double>(in_w) / out_w;
    for (int y = 0; y < out_h; ++y) {
      double fy = (y + 0.5) * sy - 0.5;
      fy = std::min(std::max(fy, 0.0), static_cast<double>(in_h - 1));
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, in_h - 1);
      const double wy = fy - y0;
      for (int x = 0; x < out_w; ++x) {
        double fx = (x + 0.5) * sx - 0.5;
        fx = std::min(std::max(fx, 0.0), static_cast<double>(in_w - 1));
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, in_w - 1);
        const double wx = fx - x0;
        auto& t = taps[static_cast<std::size_t>(y) * out_w + x];
        t[0] = {y0 * in_w + x0, static_cast<S>((1 - wy) * (1 - wx))};
        t[1] = {y0 * in_w + x1, static_cast<S>((1 - wy) * wx)};
        t[2] = {y1 * in_w + x0, static_cast<S>(wy * (1 - wx))};
        t[3] = {y1 * in_w + x1, static_cast<S>(wy * wx)};
      }
    }
  }

  Mat<S> forward(const Mat<S>& x) const {
    Mat<S> y(x.rows(), static_cast<Eigen::Index>(out_h) * out_w);
    for (Eigen::Index c = 0; c < x.rows(); ++c)
      for (std::size_t p = 0; p < taps.size(); ++p) {
        const auto& t = taps[p];
        y(c, static_cast<Eigen::Index>(p)) =
            t[0].weight * x(c, t[0].src) + t[1].weight * x(c, t[1].src) +
            t[2].weight * x(c, t[2].src) + t[3].weight * x(c, t[3].src);
      }
    return y;
  }

  Mat<S> backward(const Mat<S>& dy) const {
    Mat<S> dx = Mat<S>::Zero(dy.rows(), static_cast<Eigen::Index>(in_h) * in_w);
    for (Eigen::Index c = 0; c < dy.rows(); ++c)
      for (std::size_t p = 0; p < taps.size(); ++p) {
        const auto& t = taps[p];
        const S g = dy(c, static_cast<Eigen::Index>(p));
        dx(c, t[0].src) += t[0].weight * g;
        dx(c, t[1].src) += t[1].weight * g;
        dx(c, t[2].src) += t[2].weight * g;
        dx(c, t[3].src) += t[3].weight * g;
      }
    return dx;
  }
};

}  // namespace maskrec::nn
