/*
 * Copyright 2026 The cropid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cropid::ad {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named trainable tensors in a fixed order.
class ParameterSet {
 public:
  std::size_t add(std::string name, Mat value);
  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Mat& value(std::size_t i) { return values_[i]; }
  const Mat& value(std::size_t i) const { return values_[i]; }
  /// Throws Error(ConfigError) when absent.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t scalar_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
};

/// Gradient buffer shaped like a ParameterSet.
struct Gradients {
  std::vector<Mat> grads;

  static Gradients zeros_like(const ParameterSet& params);
  void set_zero();
  Gradients& operator+=(const Gradients& other);
  void scale(double factor);
  bool all_finite() const;
};

struct Var {
  int id = -1;
};

/// Define-by-run tape. Node order is creation order, which is a valid topological order.
class Graph {
 public:
  /// Called with the node's own handle once its gradient is complete.
  using Backward = std::function<void(Graph&, Var self)>;

  /// With record_grad false, parameters enter as constants and no backward closures are kept.
  explicit Graph(bool record_grad = true) : record_grad_(record_grad) {}

  Var constant(Mat value);
  /// A leaf whose gradient is kept (used for gradient checks of inputs).
  Var leaf(Mat value);
  /// Leaf bound to a parameter; repeated calls with the same index return the same node.
  Var param(const ParameterSet& params, std::size_t index);

  const Mat& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  /// Valid after backward() for nodes that require a gradient.
  const Mat& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }
  bool requires_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }
  double scalar(Var v) const { return value(v)(0, 0); }

  /// Reverse sweep from a 1x1 node.
  void backward(Var loss);
  /// Adds gradients of parameter leaves into `out` (shaped like the ParameterSet).
  void accumulate(Gradients& out) const;

  // Op plumbing.
  Var make(Mat value, std::initializer_list<Var> parents, Backward backward);
  Var make(Mat value, std::span<const Var> parents, Backward backward);
  Mat& grad_mut(Var v) { return nodes_[static_cast<std::size_t>(v.id)].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<int, std::size_t>> param_leaves_;
  std::vector<int> param_node_;  // parameter index -> node id or -1
  bool record_grad_ = true;
};

// Linear algebra.
Var matmul(Graph& g, Var a, Var b);     // a b
Var matmul_nt(Graph& g, Var a, Var b);  // a b^T
Var add(Graph& g, Var a, Var b);
Var add_row(Graph& g, Var a, Var row);  // row (1 x n) broadcast over a's rows
Var scale(Graph& g, Var a, double factor);
Var mul_const(Graph& g, Var a, const Mat& c);  // elementwise by a constant
Var add_const(Graph& g, Var a, const Mat& c);
Var linear(Graph& g, Var x, Var w, Var b);  // x w + b

// Nonlinearities and normalization.
Var gelu(Graph& g, Var a);  // tanh approximation
Var layer_norm(Graph& g, Var x, Var gamma, Var beta, double eps = 1e-5);
Var softmax_rows(Graph& g, Var a);

// Shape.
Var concat_rows(Graph& g, std::span<const Var> parts);
Var concat_cols(Graph& g, std::span<const Var> parts);
Var slice_cols(Graph& g, Var a, int start, int count);
Var broadcast_rows(Graph& g, Var row, int rows);
/// Rows flagged in `replace` become `row` (1 x n); the rest pass through.
Var replace_rows(Graph& g, Var a, Var row, const std::vector<bool>& replace);
/// sum_i w_i a_i over rows (w constant), giving 1 x n.
Var weighted_sum_rows(Graph& g, Var a, std::span<const double> weights);
Var sum(Graph& g, Var a);

// Losses (1 x 1 outputs).
/// sum w (pred - target)^2 with constant target and weights.
Var weighted_sq_error(Graph& g, Var pred, const Mat& target, const Mat& weights);
/// -(1 - p_t)^gamma log(max(p_t, 1e-12)) where p = softmax(logits row). Analytic gradient.
Var softmax_focal(Graph& g, Var logits, int target, double gamma);

/// Numerically stable softmax of a vector.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace cropid::ad
