#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "milpsat/errors.hpp"
#include "milpsat/graph.hpp"

namespace milpsat {

// Dense row-major 2-d tensor of doubles. Vectors are 1 x d rows.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

// Sorts ascending and accumulates left to right. Used for every reduction
// over a multiset of node contributions: equal multisets then give bitwise
// equal sums regardless of how the nodes were indexed.
double canonical_sum(std::span<double> values);

// Reverse-mode tape over Tensor values, sized for the message-passing model:
// row-wise affine maps, relu, column concatenation, edge-weighted neighbour
// sums, per-member segment sums, logistic, and the two losses.
class Tape {
 public:
  using Id = int;

  Id leaf(Tensor value);

  const Tensor& value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Tensor& grad(Id id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  // x:[R,in], w:[out,in], b:[1,out] -> [R,out]
  Id linear(Id x, Id w, Id b);
  Id relu(Id x);
  // a:[R,da], b:[R,db] -> [R,da+db]
  Id concat_cols(Id a, Id b);
  // row:[1,d] -> [rows,d]
  Id broadcast_row(Id row, int rows);

  // src:[V,d] -> [C,d]; out[c] = sum over incident edges of w_e * src[var(e)].
  // The graph (and, for segment_sum, the offsets vector) is captured by
  // reference and must outlive the tape.
  Id aggregate_to_constraints(Id src, const BatchedGraph& g);
  // src:[C,d] -> [V,d]; the transposed direction.
  Id aggregate_to_variables(Id src, const BatchedGraph& g);

  // x:[R,d] with contiguous member ranges given by offsets (size B+1) -> [B,d]
  Id segment_sum(Id x, const std::vector<int>& offsets);

  Id logistic(Id x);

  // yhat:[B,1] against labels in {0,1} -> scalar [1,1] mean loss.
  Id bce_loss(Id yhat, std::span<const int> labels);
  Id mse_loss(Id yhat, std::span<const int> labels);

  // Seeds d(root)=1 and sweeps the tape in reverse.
  void backward(Id root);

  // Smallest |input| seen by any relu so far. A tiny margin marks a point
  // where the loss is not differentiable and finite differences break down.
  double relu_margin() const { return relu_margin_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> back; // empty for leaves
  };

  Id push(Tensor value, std::function<void(Tape&)> back);
  Tensor& grad_mut(Id id) { return nodes_[static_cast<std::size_t>(id)].grad; }

  std::vector<Node> nodes_;
  double relu_margin_ = 1e300;
};

} // namespace milpsat
