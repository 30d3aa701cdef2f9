#pragma once

#include <vector>

#include "maskrec/nn/core.hpp"

namespace maskrec::nn {

// Fixed 2-D sine/cosine position table for a square patch grid: the first
// half of each row encodes the patch row, the second half the column.
template <typename S>
Mat<S> sincos_pos_embed_2d(int dim, int grid) {
  const int half = dim / 2;
  const int quarter = half / 2;
  Mat<S> table(grid * grid, dim);
  auto fill_axis = [&](int offset, int pos, Eigen::Index row) {
    for (int k = 0; k < quarter; ++k) {
      const double omega = 1.0 / std::pow(10000.0, static_cast<double>(k) / quarter);
      table(row, offset + k) = static_cast<S>(std::sin(pos * omega));
      table(row, offset + quarter + k) = static_cast<S>(std::cos(pos * omega));
    }
  };
  for (int r = 0; r < grid; ++r)
    for (int c = 0; c < grid; ++c) {
      const Eigen::Index row = static_cast<Eigen::Index>(r) * grid + c;
      fill_axis(0, r, row);
      fill_axis(half, c, row);
    }
  return table;
}

template <typename S>
struct Attention {
  int n_heads = 1;
  Linear<S> wq, wk, wv, wo;

  struct Cache {
    Mat<S> x, q, k, v, ctx;
    std::vector<Mat<S>> probs;  // per-head softmax rows [T, T]
  };

  Attention() = default;
  Attention(int dim, int heads) { resize(dim, heads); }

  void resize(int dim, int heads) {
    n_heads = heads;
    wq.resize(dim, dim);
    wk.resize(dim, dim);
    wv.resize(dim, dim);
    wo.resize(dim, dim);
  }

  void init(Rng& rng) {
    wq.init(rng);
    wk.init(rng);
    wv.init(rng);
    wo.init(rng);
  }

  void visit(const std::string& prefix, const ParamVisitor<S>& f) {
    wq.visit(prefix + ".wq", f);
    wk.visit(prefix + ".wk", f);
    wv.visit(prefix + ".wv", f);
    wo.visit(prefix + ".wo", f);
  }

  Mat<S> forward(const Mat<S>& x, Cache& c) const {
    const Eigen::Index t = x.rows(), dim = x.cols();
    const Eigen::Index dh = dim / n_heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    c.x = x;
    c.q = wq.forward(x);
    c.k = wk.forward(x);
    c.v = wv.forward(x);
    c.ctx.resize(t, dim);
    c.probs.assign(static_cast<std::size_t>(n_heads), Mat<S>());
    for (int h = 0; h < n_heads; ++h) {
      const auto qh = c.q.middleCols(h * dh, dh);
      const auto kh = c.k.middleCols(h * dh, dh);
      const auto vh = c.v.middleCols(h * dh, dh);
      Mat<S> scores = qh * kh.transpose() * scale;
      for (Eigen::Index i = 0; i < t; ++i) {
        const S mx = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - mx).exp().matrix();
        scores.row(i) /= scores.row(i).sum();
      }
      c.probs[static_cast<std::size_t>(h)] = std::move(scores);
      c.ctx.middleCols(h * dh, dh).noalias() =
          c.probs[static_cast<std::size_t>(h)] * vh;
    }
    return wo.forward(c.ctx);
  }

  Mat<S> backward(const Cache& c, const Mat<S>& dy, Attention<S>& grad) const {
    const Eigen::Index t = c.x.rows(), dim = c.x.cols();
    const Eigen::Index dh = dim / n_heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));

    const Mat<S> dctx = wo.backward(c.ctx, dy, grad.wo);
    Mat<S> dq(t, dim), dk(t, dim), dv(t, dim);
    for (int h = 0; h < n_heads; ++h) {
      const auto qh = c.q.middleCols(h * dh, dh);
      const auto kh = c.k.middleCols(h * dh, dh);
      const auto vh = c.v.middleCols(h * dh, dh);
      const Mat<S>& p = c.probs[static_cast<std::size_t>(h)];
      const auto dctx_h = dctx.middleCols(h * dh, dh);

      dv.middleCols(h * dh, dh).noalias() = p.transpose() * dctx_h;
      Mat<S> dp = dctx_h * vh.transpose();
      // softmax rows: ds = p .* (dp - rowsum(dp .* p))
      Mat<S> ds(t, t);
      for (Eigen::Index i = 0; i < t; ++i) {
        const S dot = dp.row(i).cwiseProduct(p.row(i)).sum();
        ds.row(i) = (p.row(i).array() * (dp.row(i).array() - dot)).matrix();
      }
      dq.middleCols(h * dh, dh).noalias() = ds * kh * scale;
      dk.middleCols(h * dh, dh).noalias() = ds.transpose() * qh * scale;
    }
    Mat<S> dx = wq.backward(c.x, dq, grad.wq);
    dx += wk.backward(c.x, dk, grad.wk);
    dx += wv.backward(c.x, dv, grad.wv);
    return dx;
  }
};

template <typename S>
struct Mlp {
  Linear<S> fc1, fc2;

  struct Cache {
    Mat<S> x, pre, act;
  };

  Mlp() = default;
  Mlp(int dim, int hidden) { resize(dim, hidden); }

  void resize(int dim, int hidden) {
    fc1.resize(dim, hidden);
    fc2.resize(hidden, dim);
  }

  void init(Rng& rng) {
    fc1.init(rng);
    fc2.init(rng);
  }

  void visit(const std::string& prefix, const ParamVisitor<S>& f) {
    fc1.visit(prefix + ".fc1", f);
    fc2.visit(prefix + ".fc2", f);
  }

  Mat<S> forward(const Mat<S>& x, Cache& c) const {
    c.x = x;
    c.pre = fc1.forward(x);
    c.act = c.pre.unaryExpr([](S v) { return gelu(v); });
    return fc2.forward(c.act);
  }

  Mat<S> backward(const Cache& c, const Mat<S>& dy, Mlp<S>& grad) const {
    Mat<S> dact = fc2.backward(c.act, dy, grad.fc2);
    Mat<S> dpre = dact.cwiseProduct(c.pre.unaryExpr([](S v) { return gelu_grad(v); }));
    return fc1.backward(c.x, dpre, grad.fc1);
  }
};

// Pre-norm transformer block: x + Attn(LN1(x)), then + Mlp(LN2(.)).
template <typename S>
struct Block {
  LayerNorm<S> ln1, ln2;
  Attention<S> attn;
  Mlp<S> mlp;

  struct Cache {
    typename LayerNorm<S>::Cache ln1c, ln2c;
    typename Attention<S>::Cache attnc;
    typename Mlp<S>::Cache mlpc;
  };

  Block() = default;
  Block(int dim, int heads, int mlp_ratio = 4) { resize(dim, heads, mlp_ratio); }

  void resize(int dim, int heads, int mlp_ratio = 4) {
    ln1.resize(dim);
    ln2.resize(dim);
    attn.resize(dim, heads);
    mlp.resize(dim, dim * mlp_ratio);
  }

  void init(Rng& rng) {
    attn.init(rng);
    mlp.init(rng);
  }

  void visit(const std::string& prefix, const ParamVisitor<S>& f) {
    ln1.visit(prefix + ".ln1", f);
    attn.visit(prefix + ".attn", f);
    ln2.visit(prefix + ".ln2", f);
    mlp.visit(prefix + ".mlp", f);
  }

  Mat<S> forward(const Mat<S>& x, Cache& c) const {
    Mat<S> h = ln1.forward(x, c.ln1c);
    Mat<S> x2 = x + attn.forward(h, c.attnc);
    Mat<S> h2 = ln2.forward(x2, c.ln2c);
    return x2 + mlp.forward(h2, c.mlpc);
  }

  Mat<S> backward(const Cache& c, const Mat<S>& dy, Block<S>& grad) const {
    Mat<S> dh2 = mlp.backward(c.mlpc, dy, grad.mlp);
    Mat<S> dx2 = dy + ln2.backward(c.ln2c, dh2, grad.ln2);
    Mat<S> dh1 = attn.backward(c.attnc, dx2, grad.attn);
    return dx2 + ln1.backward(c.ln1c, dh1, grad.ln1);
  }
};

}  // namespace maskrec::nn
