#pragma once

// Forward kernels shared by the differentiable tape and plain inference.
//
// Batched sequence tensors use a time-major layout: a C x (T*B) matrix whose
// column t*B + b holds time step t of batch element b. A time shift by d steps
// is then a shift of d*B columns, and one time step is a contiguous block.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace hvac::nn {

using Matrix = Eigen::MatrixXd;

enum class Activation { Identity, Tanh, Sigmoid, Softplus };

inline double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }
inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

template <typename Derived>
void activate_inplace(Eigen::MatrixBase<Derived>& m, Activation act) {
  switch (act) {
    case Activation::Identity: break;
    // exp-based forms vectorize for double, unlike Eigen's tanh
    case Activation::Tanh: m = (1.0 - 2.0 / ((2.0 * m.array()).exp() + 1.0)).matrix(); break;
    case Activation::Sigmoid: m = (1.0 / (1.0 + (-m.array()).exp())).matrix(); break;
    case Activation::Softplus: m = m.unaryExpr([](double a) { return softplus(a); }); break;
  }
}

/// d(activation)/d(pre-activation), expressed through the activation output.
template <typename Derived>
Matrix activation_slope(const Eigen::MatrixBase<Derived>& out, Activation act) {
  switch (act) {
    case Activation::Identity: return Matrix::Ones(out.rows(), out.cols());
    case Activation::Tanh: return (1.0 - out.array().square()).matrix();
    case Activation::Sigmoid: return (out.array() * (1.0 - out.array())).matrix();
    case Activation::Softplus: return out.unaryExpr([](double y) { return -std::expm1(-y); });
  }
  return Matrix::Ones(out.rows(), out.cols());
}

/// upstream * d(activation)/d(pre-activation) in a single pass.
inline Matrix activation_backward(const Matrix& upstream, const Matrix& out, Activation act) {
  const auto u = upstream.array();
  const auto y = out.array();
  switch (act) {
    case Activation::Identity: return upstream;
    case Activation::Tanh: return (u * (1.0 - y.square())).matrix();
    case Activation::Sigmoid: return (u * y * (1.0 - y)).matrix();
    case Activation::Softplus: return upstream.cwiseProduct(activation_slope(out, act));
  }
  return upstream;
}

/// act(W x + b), with b broadcast over columns.
template <typename DW, typename DX, typename DB>
Matrix dense_forward(const Eigen::MatrixBase<DW>& W, const Eigen::MatrixBase<DX>& x,
                     const Eigen::MatrixBase<DB>& b, Activation act) {
  Matrix y = W * x;
  y.colwise() += b.col(0);
  activate_inplace(y, act);
  return y;
}

/// Column range of one conv tap: output columns [dst, dst + len) read input
/// columns [src, src + len). Taps reaching outside the sequence read zeros,
/// which is same padding; since a time shift of d steps is a shift of d*B
/// columns, padding respects sequence boundaries in a time-major batch.
struct TapRange {
  Eigen::Index dst = 0, src = 0, len = 0;
};

inline TapRange tap_range(Eigen::Index k, Eigen::Index kernel, Eigen::Index batch, Eigen::Index n) {
  const Eigen::Index shift = (k - (kernel - 1) / 2) * batch;
  return {std::max<Eigen::Index>(0, -shift), std::max<Eigen::Index>(0, shift), n - std::abs(shift)};
}

/// Same-padded 1-D cross-correlation before activation:
/// out[o, t] = b[o] + sum_k sum_c W[o, k*C + c] x[c, t + k - pad].
template <typename DX, typename DW, typename DB>
Matrix conv1d_linear(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DW>& W,
                     const Eigen::MatrixBase<DB>& b, Eigen::Index kernel, Eigen::Index batch) {
  const Eigen::Index C = x.rows();
  const Eigen::Index N = x.cols();
  Matrix y(W.rows(), N);
  y.colwise() = b.col(0);
  for (Eigen::Index k = 0; k < kernel; ++k) {
    const TapRange r = tap_range(k, kernel, batch, N);
    if (r.len > 0) y.middleCols(r.dst, r.len).noalias() += W.middleCols(k * C, C) * x.middleCols(r.src, r.len);
  }
  return y;
}

template <typename DX, typename DW, typename DB>
Matrix conv1d_forward(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DW>& W,
                      const Eigen::MatrixBase<DB>& b, Eigen::Index kernel, Eigen::Index batch,
                      Activation act) {
  Matrix y = conv1d_linear(x, W, b, kernel, batch);
  activate_inplace(y, act);
  return y;
}

/// GRU gate values kept for the backward pass.
struct GruCache {
  Matrix z, r, cand, rh;
};

/// h' = (1 - z) * h + z * cand with
///   z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
///   cand = tanh(Wc x + Uc (r * h) + bc).
/// Wx stacks [Wz; Wr; Wc] (3H x I), Wh stacks [Uz; Ur; Uc] (3H x H), b is 3H x 1.
template <typename DX, typename DH, typename DWx, typename DWh, typename DB>
Matrix gru_forward(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DH>& h,
                   const Eigen::MatrixBase<DWx>& Wx, const Eigen::MatrixBase<DWh>& Wh,
                   const Eigen::MatrixBase<DB>& b, GruCache* cache = nullptr) {
  const Eigen::Index H = h.rows();
  Matrix ax = Wx * x;
  ax.colwise() += b.col(0);
  Matrix zr = ax.topRows(2 * H) + Wh.topRows(2 * H) * h;
  activate_inplace(zr, Activation::Sigmoid);
  Matrix rh = zr.bottomRows(H).cwiseProduct(h);
  Matrix cand = ax.bottomRows(H) + Wh.bottomRows(H) * rh;
  activate_inplace(cand, Activation::Tanh);
  const auto z = zr.topRows(H);
  Matrix next = h + z.cwiseProduct(cand - h);
  if (cache) {
    cache->z = z;
    cache->r = zr.bottomRows(H);
    cache->cand = std::move(cand);
    cache->rh = std::move(rh);
  }
  return next;
}

}  // namespace hvac::nn
