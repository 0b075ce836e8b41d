// tensor.hpp — reverse-mode autodiff over row-major double matrices.
//
// A Tensor is a shared handle to a graph node. Forward ops build the graph;
// backward(loss) runs a topological sweep and accumulates into .grad of every
// node with requires_grad set. Parameters are long-lived nodes reused across
// steps; intermediate nodes die with the last handle to the result.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "selftalk/mat.hpp"

namespace selftalk {

struct TensorNode {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  static Tensor constant(const Mat& m);
  static Tensor constant(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  // Trainable leaf.
  static Tensor parameter(const Mat& m);

  bool valid() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool b) { node_->requires_grad = b; }

  double& at(std::size_t r, std::size_t c) { return node_->value[r * node_->cols + c]; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }
  std::vector<double>& values() { return node_->value; }
  const std::vector<double>& values() const { return node_->value; }
  const std::vector<double>& grad() const { return node_->grad; }
  double item() const;

  Mat to_mat() const { return Mat(rows(), cols(), node_->value); }

  std::shared_ptr<TensorNode> node() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

// --- graph ops -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// Broadcast 1 x C bias over every row of a (T x C).
Tensor add_rowvec(const Tensor& a, const Tensor& bias);
Tensor relu(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-5);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, std::size_t first, std::size_t count);
Tensor slice_rows(const Tensor& a, std::size_t first, std::size_t count);
// out[r, j] = a[r, indices[j]]; backward scatter-adds, so gradients w.r.t.
// unpicked columns are exactly zero.
Tensor gather_cols(const Tensor& a, const std::vector<std::size_t>& indices);
// Endpoint-inclusive linear row resampling (same rule as mat.hpp).
Tensor resample_rows(const Tensor& a, std::size_t out_rows);
// x: N x Cin, w: Cout x (Cin*kernel), b: 1 x Cout. Valid padding.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t kernel,
              std::size_t stride);
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

// Node with caller-supplied backward; the caller fills values() after
// construction. Used by losses that own their gradient derivation (CTC).
Tensor make_custom_op(std::size_t rows, std::size_t cols, const std::vector<Tensor>& parents,
                      std::function<void(TensorNode&)> backward_fn);

// Runs the backward sweep from a 1x1 loss node. Gradients accumulate; call
// zero_grad on parameters between steps.
void backward(const Tensor& loss);
void zero_grad(const Tensor& t);

}  // namespace selftalk
