#include "hvac/nn/tape.hpp"

#include <cmath>
#include <memory>

#include "hvac/error.hpp"

namespace hvac::nn {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
              std::to_string(b.cols()));
}

}  // namespace

Tape::Tape(const ParamVector& params)
    : params_(&params), param_grad_(Eigen::VectorXd::Zero(params.layout.size())) {}

Var Tape::push(Matrix value, bool needs_grad, Backprop back) {
  nodes_.push_back(Node{std::move(value), Matrix{}, needs_grad ? std::move(back) : Backprop{},
                        needs_grad});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad_ref(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, {}); }

Var Tape::input(Matrix value) {
  return push(std::move(value), true, [](Tape&, int) {});
}

Var Tape::param(std::string_view name) {
  require(params_ != nullptr, "tape has no bound parameters");
  const Segment& seg = params_->layout.find(name);
  const Index offset = seg.offset;
  Matrix value = params_->matrix(name);
  return push(std::move(value), true, [offset](Tape& t, int self) {
    const Matrix& g = t.upstream(self);
    t.param_grad_.segment(offset, g.size()) += Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
  });
}

Var Tape::dense(Var x, Var W, Var b, Activation act) {
  const Matrix& xv = value(x);
  const Matrix& Wv = value(W);
  require(Wv.cols() == xv.rows(), "dense: W cols != x rows");
  require(value(b).rows() == Wv.rows() && value(b).cols() == 1, "dense: bias shape mismatch");
  Matrix y = dense_forward(Wv, xv, value(b), act);
  const bool ng = needs(x) || needs(W) || needs(b);
  return push(std::move(y), ng, [x, W, b, act](Tape& t, int self) {
    const Matrix da = activation_backward(t.upstream(self), t.value(Var{self}), act);
    if (t.needs(W)) t.grad_ref(W).noalias() += da * t.value(x).transpose();
    if (t.needs(b)) t.grad_ref(b) += da.rowwise().sum();
    if (t.needs(x)) t.grad_ref(x).noalias() += t.value(W).transpose() * da;
  });
}

Var Tape::conv1d(Var x, Var W, Var b, Index kernel, Index batch, Activation act) {
  const Matrix& xv = value(x);
  const Matrix& Wv = value(W);
  require(kernel >= 1 && kernel % 2 == 1, "conv1d: kernel width must be odd");
  require(batch >= 1 && xv.cols() % batch == 0, "conv1d: columns not a multiple of batch");
  require(xv.cols() / batch >= kernel, "conv1d: time length shorter than kernel");
  require(Wv.cols() == kernel * xv.rows(), "conv1d: W cols != kernel * channels");
  require(value(b).rows() == Wv.rows() && value(b).cols() == 1, "conv1d: bias shape mismatch");
  Matrix y = conv1d_forward(xv, Wv, value(b), kernel, batch, act);
  const bool ng = needs(x) || needs(W) || needs(b);
  return push(std::move(y), ng, [x, W, b, act, kernel, batch](Tape& t, int self) {
    const Matrix da = activation_backward(t.upstream(self), t.value(Var{self}), act);
    const Matrix& xv = t.value(x);
    const Matrix& Wv = t.value(W);
    const Index C = xv.rows();
    const Index N = xv.cols();
    if (t.needs(b)) t.grad_ref(b) += da.rowwise().sum();
    for (Index k = 0; k < kernel; ++k) {
      const TapRange r = tap_range(k, kernel, batch, N);
      if (r.len <= 0) continue;
      const auto da_k = da.middleCols(r.dst, r.len);
      if (t.needs(W)) t.grad_ref(W).middleCols(k * C, C).noalias() += da_k * xv.middleCols(r.src, r.len).transpose();
      if (t.needs(x)) t.grad_ref(x).middleCols(r.src, r.len).noalias() += Wv.middleCols(k * C, C).transpose() * da_k;
    }
  });
}

Var Tape::gru_cell(Var x, Var h, Var Wx, Var Wh, Var b) {
  const Matrix& xv = value(x);
  const Matrix& hv = value(h);
  const Index H = hv.rows();
  require(value(Wx).rows() == 3 * H && value(Wx).cols() == xv.rows(), "gru: Wx shape mismatch");
  require(value(Wh).rows() == 3 * H && value(Wh).cols() == H, "gru: Wh shape mismatch");
  require(value(b).rows() == 3 * H && value(b).cols() == 1, "gru: bias shape mismatch");
  require(xv.cols() == hv.cols(), "gru: batch mismatch between x and h");
  auto cache = std::make_shared<GruCache>();
  Matrix next = gru_forward(xv, hv, value(Wx), value(Wh), value(b), cache.get());
  const bool ng = needs(x) || needs(h) || needs(Wx) || needs(Wh) || needs(b);
  return push(std::move(next), ng, [x, h, Wx, Wh, b, cache, H](Tape& t, int self) {
    const Matrix& dn = t.upstream(self);
    const Matrix& hv = t.value(h);
    const Matrix& Whv = t.value(Wh);
    const GruCache& c = *cache;
    // Pre-activation gradients stacked as [z; r; cand].
    Matrix da(3 * H, dn.cols());
    const Matrix dcand = dn.cwiseProduct(c.z);
    da.bottomRows(H) = dcand.cwiseProduct((1.0 - c.cand.array().square()).matrix());
    const Matrix drh = Whv.bottomRows(H).transpose() * da.bottomRows(H);
    da.topRows(H) = dn.cwiseProduct(c.cand - hv).cwiseProduct(
        (c.z.array() * (1.0 - c.z.array())).matrix());
    da.middleRows(H, H) = drh.cwiseProduct(hv).cwiseProduct(
        (c.r.array() * (1.0 - c.r.array())).matrix());
    if (t.needs(Wx)) t.grad_ref(Wx).noalias() += da * t.value(x).transpose();
    if (t.needs(b)) t.grad_ref(b) += da.rowwise().sum();
    if (t.needs(Wh)) {
      Matrix& g = t.grad_ref(Wh);
      g.topRows(2 * H).noalias() += da.topRows(2 * H) * hv.transpose();
      g.bottomRows(H).noalias() += da.bottomRows(H) * c.rh.transpose();
    }
    if (t.needs(x)) t.grad_ref(x).noalias() += t.value(Wx).transpose() * da;
    if (t.needs(h)) {
      Matrix& g = t.grad_ref(h);
      g += dn.cwiseProduct((1.0 - c.z.array()).matrix());
      g += drh.cwiseProduct(c.r);
      g.noalias() += Whv.topRows(2 * H).transpose() * da.topRows(2 * H);
    }
  });
}

Var Tape::add(Var a, Var b) {
  check_same_shape(value(a), value(b), "add");
  return push(value(a) + value(b), needs(a) || needs(b), [a, b](Tape& t, int self) {
    if (t.needs(a)) t.grad_ref(a) += t.upstream(self);
    if (t.needs(b)) t.grad_ref(b) += t.upstream(self);
  });
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(value(a), value(b), "sub");
  return push(value(a) - value(b), needs(a) || needs(b), [a, b](Tape& t, int self) {
    if (t.needs(a)) t.grad_ref(a) += t.upstream(self);
    if (t.needs(b)) t.grad_ref(b) -= t.upstream(self);
  });
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(value(a), value(b), "mul");
  return push(value(a).cwiseProduct(value(b)), needs(a) || needs(b), [a, b](Tape& t, int self) {
    if (t.needs(a)) t.grad_ref(a) += t.upstream(self).cwiseProduct(t.value(b));
    if (t.needs(b)) t.grad_ref(b) += t.upstream(self).cwiseProduct(t.value(a));
  });
}

Var Tape::affine(Var a, double scale, double shift) {
  Matrix y = (value(a).array() * scale + shift).matrix();
  return push(std::move(y), needs(a), [a, scale](Tape& t, int self) {
    t.grad_ref(a) += scale * t.upstream(self);
  });
}

Var Tape::square(Var a) {
  return push(value(a).array().square().matrix(), needs(a), [a](Tape& t, int self) {
    t.grad_ref(a) += 2.0 * t.upstream(self).cwiseProduct(t.value(a));
  });
}

Var Tape::log(Var a) {
  require((value(a).array() > 0.0).all(), "log: non-positive argument");
  return push(value(a).array().log().matrix(), needs(a), [a](Tape& t, int self) {
    t.grad_ref(a) += t.upstream(self).cwiseQuotient(t.value(a));
  });
}

Var Tape::activate(Var a, Activation act) {
  Matrix y = value(a);
  activate_inplace(y, act);
  return push(std::move(y), needs(a), [a, act](Tape& t, int self) {
    t.grad_ref(a) += activation_backward(t.upstream(self), t.value(Var{self}), act);
  });
}

Var Tape::slice_rows(Var a, Index row, Index count) {
  require(row >= 0 && count >= 0 && row + count <= value(a).rows(), "slice_rows out of range");
  return push(value(a).middleRows(row, count), needs(a), [a, row, count](Tape& t, int self) {
    t.grad_ref(a).middleRows(row, count) += t.upstream(self);
  });
}

Var Tape::slice_cols(Var a, Index col, Index count) {
  require(col >= 0 && count >= 0 && col + count <= value(a).cols(), "slice_cols out of range");
  return push(value(a).middleCols(col, count), needs(a), [a, col, count](Tape& t, int self) {
    t.grad_ref(a).middleCols(col, count) += t.upstream(self);
  });
}

Var Tape::concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const Index cols = value(parts[0]).cols();
  Index rows = 0;
  bool ng = false;
  for (Var p : parts) {
    require(value(p).cols() == cols, "concat_rows: column mismatch");
    rows += value(p).rows();
    ng = ng || needs(p);
  }
  Matrix y(rows, cols);
  Index r = 0;
  for (Var p : parts) {
    y.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(y), ng, [ps](Tape& t, int self) {
    Index r0 = 0;
    for (Var p : ps) {
      const Index n = t.value(p).rows();
      if (t.needs(p)) t.grad_ref(p) += t.upstream(self).middleRows(r0, n);
      r0 += n;
    }
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const Index rows = value(parts[0]).rows();
  Index cols = 0;
  bool ng = false;
  for (Var p : parts) {
    require(value(p).rows() == rows, "concat_cols: row mismatch");
    cols += value(p).cols();
    ng = ng || needs(p);
  }
  Matrix y(rows, cols);
  Index c = 0;
  for (Var p : parts) {
    y.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(y), ng, [ps](Tape& t, int self) {
    Index c0 = 0;
    for (Var p : ps) {
      const Index n = t.value(p).cols();
      if (t.needs(p)) t.grad_ref(p) += t.upstream(self).middleCols(c0, n);
      c0 += n;
    }
  });
}

Var Tape::sum(Var a) {
  Matrix y(1, 1);
  y(0, 0) = value(a).sum();
  return push(std::move(y), needs(a), [a](Tape& t, int self) {
    t.grad_ref(a).array() += t.upstream(self)(0, 0);
  });
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  require(m.rows() == 1 && m.cols() == 1, "value is not a scalar");
  return m(0, 0);
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Eigen::VectorXd Tape::backward(Var loss) {
  require(loss.id >= 0 && loss.id < static_cast<int>(nodes_.size()), "backward: invalid loss node");
  const Matrix& lv = value(loss);
  require(lv.rows() == 1 && lv.cols() == 1, "backward: loss must be a 1x1 scalar, got " +
                                                std::to_string(lv.rows()) + "x" +
                                                std::to_string(lv.cols()));
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (params_) param_grad_.setZero();
  grad_ref(loss)(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.back && n.grad.size() != 0) n.back(*this, i);
  }
  return params_ ? param_grad_ : Eigen::VectorXd{};
}

}  // namespace hvac::nn
