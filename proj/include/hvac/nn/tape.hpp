#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "hvac/nn/kernels.hpp"
#include "hvac/nn/param_vector.hpp"

namespace hvac::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

/// Reverse-mode autodiff over matrix-valued nodes. Nodes are appended in
/// evaluation order, so the backward sweep walks them in exact reverse
/// topological order. Parameter leaves read from, and accumulate gradients
/// into, a flat ParamVector.
class Tape {
 public:
  Tape() = default;
  explicit Tape(const ParamVector& params);

  /// Leaf that never receives a gradient.
  Var constant(Matrix value);
  /// Leaf whose gradient is retained and queryable via grad().
  Var input(Matrix value);
  /// Leaf bound to a parameter segment.
  Var param(std::string_view segment);

  Var dense(Var x, Var W, Var b, Activation act);
  /// x: C x (T*B) time-major, W: Cout x (kernel*C), b: Cout x 1.
  Var conv1d(Var x, Var W, Var b, Index kernel, Index batch, Activation act);
  Var gru_cell(Var x, Var h, Var Wx, Var Wh, Var b);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var affine(Var a, double scale, double shift);
  Var square(Var a);
  Var log(Var a);
  Var activate(Var a, Activation act);
  Var slice_rows(Var a, Index row, Index count);
  Var slice_cols(Var a, Index col, Index count);
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(std::span<const Var> parts);
  Var sum(Var a);

  [[nodiscard]] const Matrix& value(Var v) const { return nodes_[v.id].value; }
  [[nodiscard]] double scalar(Var v) const;
  /// Gradient of the last backward() target w.r.t. v (zeros if unreached).
  [[nodiscard]] Matrix grad(Var v) const;
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a 1x1 node; returns d(loss)/d(params) as a flat
  /// vector laid out like the bound ParamVector (empty if none bound).
  Eigen::VectorXd backward(Var loss);

 private:
  using Backprop = std::function<void(Tape&, int self)>;
  struct Node {
    Matrix value;
    Matrix grad;
    Backprop back;
    bool needs_grad = false;
  };

  Var push(Matrix value, bool needs_grad, Backprop back);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  Matrix& grad_ref(Var v);
  const Matrix& upstream(int self) const { return nodes_[self].grad; }

  std::vector<Node> nodes_;
  const ParamVector* params_ = nullptr;
  Eigen::VectorXd param_grad_;
};

}  // namespace hvac::nn
