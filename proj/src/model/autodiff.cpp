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

#include "cropid/model/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cropid/core/error.hpp"

namespace cropid::ad {

std::size_t ParameterSet::add(std::string name, Mat value) {
  if (contains(name)) throw Error(ErrorCode::ConfigError, "duplicate parameter '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorCode::ConfigError, "no parameter '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool ParameterSet::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

Gradients Gradients::zeros_like(const ParameterSet& params) {
  Gradients g;
  g.grads.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    g.grads.push_back(Mat::Zero(params.value(i).rows(), params.value(i).cols()));
  }
  return g;
}

void Gradients::set_zero() {
  for (auto& m : grads) m.setZero();
}

Gradients& Gradients::operator+=(const Gradients& other) {
  for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += other.grads[i];
  return *this;
}

void Gradients::scale(double factor) {
  for (auto& m : grads) m *= factor;
}

bool Gradients::all_finite() const {
  for (const auto& m : grads) {
    if (!m.allFinite()) return false;
  }
  return true;
}

Var Graph::constant(Mat value) {
  nodes_.push_back(Node{std::move(value), Mat(), false, nullptr});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::leaf(Mat value) {
  nodes_.push_back(Node{std::move(value), Mat(), true, nullptr});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::param(const ParameterSet& params, std::size_t index) {
  if (param_node_.size() < params.size()) param_node_.resize(params.size(), -1);
  if (param_node_[index] >= 0) return Var{param_node_[index]};
  const Var v = record_grad_ ? leaf(params.value(index)) : constant(params.value(index));
  param_node_[index] = v.id;
  if (record_grad_) param_leaves_.emplace_back(v.id, index);
  return v;
}

Var Graph::make(Mat value, std::initializer_list<Var> parents, Backward backward) {
  return make(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
}

Var Graph::make(Mat value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  for (Var p : parents) needs = needs || requires_grad(p);
  nodes_.push_back(Node{std::move(value), Mat(), needs, needs ? std::move(backward) : nullptr});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

void Graph::backward(Var loss) {
  const auto& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) throw Error(ErrorCode::ConfigError, "backward needs a scalar node");
  for (int i = 0; i <= loss.id; ++i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.requires_grad) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  }
  if (!requires_grad(loss)) return;
  grad_mut(loss)(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.requires_grad && n.backward) n.backward(*this, Var{i});
  }
}

void Graph::accumulate(Gradients& out) const {
  for (const auto& [node, index] : param_leaves_) {
    const auto& g = nodes_[static_cast<std::size_t>(node)].grad;
    if (g.size() > 0) out.grads[index] += g;
  }
}

Var matmul(Graph& g, Var a, Var b) {
  Mat out = g.value(a) * g.value(b);
  return g.make(std::move(out), {a, b}, [a, b](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    if (g.requires_grad(a)) g.grad_mut(a).noalias() += go * g.value(b).transpose();
    if (g.requires_grad(b)) g.grad_mut(b).noalias() += g.value(a).transpose() * go;
  });
}

Var matmul_nt(Graph& g, Var a, Var b) {
  Mat out = g.value(a) * g.value(b).transpose();
  return g.make(std::move(out), {a, b}, [a, b](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    if (g.requires_grad(a)) g.grad_mut(a).noalias() += go * g.value(b);
    if (g.requires_grad(b)) g.grad_mut(b).noalias() += go.transpose() * g.value(a);
  });
}

Var add(Graph& g, Var a, Var b) {
  Mat out = g.value(a) + g.value(b);
  return g.make(std::move(out), {a, b}, [a, b](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    if (g.requires_grad(a)) g.grad_mut(a) += go;
    if (g.requires_grad(b)) g.grad_mut(b) += go;
  });
}

Var add_row(Graph& g, Var a, Var row) {
  Mat out = g.value(a);
  out.rowwise() += g.value(row).row(0);
  return g.make(std::move(out), {a, row}, [a, row](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    if (g.requires_grad(a)) g.grad_mut(a) += go;
    if (g.requires_grad(row)) g.grad_mut(row) += go.colwise().sum();
  });
}

Var scale(Graph& g, Var a, double factor) {
  Mat out = g.value(a) * factor;
  return g.make(std::move(out), {a}, [a, factor](Graph& g, Var self) { g.grad_mut(a) += g.grad(self) * factor; });
}

Var mul_const(Graph& g, Var a, const Mat& c) {
  Mat out = g.value(a).cwiseProduct(c);
  return g.make(std::move(out), {a}, [a, c](Graph& g, Var self) { g.grad_mut(a) += g.grad(self).cwiseProduct(c); });
}

Var add_const(Graph& g, Var a, const Mat& c) {
  Mat out = g.value(a) + c;
  return g.make(std::move(out), {a}, [a](Graph& g, Var self) { g.grad_mut(a) += g.grad(self); });
}

Var linear(Graph& g, Var x, Var w, Var b) {
  Mat out = g.value(x) * g.value(w);
  out.rowwise() += g.value(b).row(0);
  return g.make(std::move(out), {x, w, b}, [x, w, b](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    if (g.requires_grad(x)) g.grad_mut(x).noalias() += go * g.value(w).transpose();
    if (g.requires_grad(w)) g.grad_mut(w).noalias() += g.value(x).transpose() * go;
    if (g.requires_grad(b)) g.grad_mut(b) += go.colwise().sum();
  });
}

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Var gelu(Graph& g, Var a) {
  const Mat& x = g.value(a);
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    out.data()[i] = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  return g.make(std::move(out), {a}, [a](Graph& g, Var self) {
    const Mat& x = g.value(a);
    const Mat& go = g.grad(self);
    Mat& ga = g.grad_mut(a);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = x.data()[i];
      const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      ga.data()[i] += go.data()[i] * d;
    }
  });
}

Var layer_norm(Graph& g, Var x, Var gamma, Var beta, double eps) {
  const Mat& xv = g.value(x);
  const Eigen::Index n = xv.rows();
  const Eigen::Index d = xv.cols();
  Mat xhat(n, d);
  Eigen::VectorXd inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = xv.row(r).mean();
    const double var = (xv.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mean) * inv_std(r);
  }
  Mat out = xhat;
  out.array().rowwise() *= g.value(gamma).row(0).array();
  out.rowwise() += g.value(beta).row(0);
  return g.make(std::move(out), {x, gamma, beta},
                [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, Var self) {
                  const Mat& go = g.grad(self);
                  if (g.requires_grad(gamma)) g.grad_mut(gamma) += go.cwiseProduct(xhat).colwise().sum();
                  if (g.requires_grad(beta)) g.grad_mut(beta) += go.colwise().sum();
                  if (!g.requires_grad(x)) return;
                  Mat dxhat = go;
                  dxhat.array().rowwise() *= g.value(gamma).row(0).array();
                  Mat& gx = g.grad_mut(x);
                  const double dim = static_cast<double>(xhat.cols());
                  for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
                    const double m1 = dxhat.row(r).sum() / dim;
                    const double m2 = dxhat.row(r).dot(xhat.row(r)) / dim;
                    gx.row(r).array() += inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
                  }
                });
}

Var softmax_rows(Graph& g, Var a) {
  const Mat& x = g.value(a);
  Mat out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return g.make(std::move(out), {a}, [a](Graph& g, Var self) {
    const Mat& y = g.value(self);
    const Mat& go = g.grad(self);
    Mat& ga = g.grad_mut(a);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = go.row(r).dot(y.row(r));
      ga.row(r).array() += y.row(r).array() * (go.row(r).array() - dot);
    }
  });
}

Var concat_rows(Graph& g, std::span<const Var> parts) {
  Eigen::Index rows = 0;
  const Eigen::Index cols = g.value(parts[0]).cols();
  for (Var p : parts) {
    if (g.value(p).cols() != cols) throw Error(ErrorCode::ConfigError, "concat_rows column mismatch");
    rows += g.value(p).rows();
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, g.value(p).rows()) = g.value(p);
    r += g.value(p).rows();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return g.make(std::move(out), parts, [ps](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    Eigen::Index r = 0;
    for (Var p : ps) {
      const Eigen::Index n = g.value(p).rows();
      if (g.requires_grad(p)) g.grad_mut(p) += go.middleRows(r, n);
      r += n;
    }
  });
}

Var concat_cols(Graph& g, std::span<const Var> parts) {
  Eigen::Index cols = 0;
  const Eigen::Index rows = g.value(parts[0]).rows();
  for (Var p : parts) {
    if (g.value(p).rows() != rows) throw Error(ErrorCode::ConfigError, "concat_cols row mismatch");
    cols += g.value(p).cols();
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, g.value(p).cols()) = g.value(p);
    c += g.value(p).cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return g.make(std::move(out), parts, [ps](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    Eigen::Index c = 0;
    for (Var p : ps) {
      const Eigen::Index n = g.value(p).cols();
      if (g.requires_grad(p)) g.grad_mut(p) += go.middleCols(c, n);
      c += n;
    }
  });
}

Var slice_cols(Graph& g, Var a, int start, int count) {
  Mat out = g.value(a).middleCols(start, count);
  return g.make(std::move(out), {a}, [a, start, count](Graph& g, Var self) {
    g.grad_mut(a).middleCols(start, count) += g.grad(self);
  });
}

Var broadcast_rows(Graph& g, Var row, int rows) {
  Mat out = g.value(row).row(0).replicate(rows, 1);
  return g.make(std::move(out), {row}, [row](Graph& g, Var self) { g.grad_mut(row) += g.grad(self).colwise().sum(); });
}

Var replace_rows(Graph& g, Var a, Var row, const std::vector<bool>& replace) {
  Mat out = g.value(a);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    if (replace[static_cast<std::size_t>(r)]) out.row(r) = g.value(row).row(0);
  }
  return g.make(std::move(out), {a, row}, [a, row, replace](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    for (Eigen::Index r = 0; r < go.rows(); ++r) {
      if (replace[static_cast<std::size_t>(r)]) {
        if (g.requires_grad(row)) g.grad_mut(row).row(0) += go.row(r);
      } else if (g.requires_grad(a)) {
        g.grad_mut(a).row(r) += go.row(r);
      }
    }
  });
}

Var weighted_sum_rows(Graph& g, Var a, std::span<const double> weights) {
  const Mat& x = g.value(a);
  Mat out = Mat::Zero(1, x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double w = weights[static_cast<std::size_t>(r)];
    if (w != 0.0) out.row(0) += w * x.row(r);
  }
  std::vector<double> w(weights.begin(), weights.end());
  return g.make(std::move(out), {a}, [a, w = std::move(w)](Graph& g, Var self) {
    const Mat& go = g.grad(self);
    Mat& ga = g.grad_mut(a);
    for (Eigen::Index r = 0; r < ga.rows(); ++r) {
      if (w[static_cast<std::size_t>(r)] != 0.0) ga.row(r) += w[static_cast<std::size_t>(r)] * go.row(0);
    }
  });
}

Var sum(Graph& g, Var a) {
  Mat out(1, 1);
  out(0, 0) = g.value(a).sum();
  return g.make(std::move(out), {a}, [a](Graph& g, Var self) { g.grad_mut(a).array() += g.grad(self)(0, 0); });
}

Var weighted_sq_error(Graph& g, Var pred, const Mat& target, const Mat& weights) {
  const Mat diff = g.value(pred) - target;
  Mat out(1, 1);
  out(0, 0) = (diff.array().square() * weights.array()).sum();
  return g.make(std::move(out), {pred}, [pred, diff, weights](Graph& g, Var self) {
    g.grad_mut(pred).array() += 2.0 * g.grad(self)(0, 0) * diff.array() * weights.array();
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

namespace {

constexpr double kProbFloor = 1e-12;

}  // namespace

Var softmax_focal(Graph& g, Var logits, int target, double gamma) {
  const Mat& z = g.value(logits);
  if (z.rows() != 1) throw Error(ErrorCode::ConfigError, "softmax_focal expects a single row of logits");
  const auto probs = softmax(std::span<const double>(z.data(), static_cast<std::size_t>(z.cols())));
  const double p = probs[static_cast<std::size_t>(target)];
  const double pc = std::max(p, kProbFloor);
  const double w = std::pow(1.0 - p, gamma);
  Mat out(1, 1);
  out(0, 0) = -w * std::log(pc);
  // p * dL/dp, written so p = 1 and gamma < 1 stay finite. Below the floor the log is constant.
  double coef = p >= kProbFloor ? -w : 0.0;
  if (gamma > 0.0 && p < 1.0) coef += gamma * p * std::pow(1.0 - p, gamma - 1.0) * std::log(pc);
  return g.make(std::move(out), {logits}, [logits, probs, target, coef](Graph& g, Var self) {
    const double go = g.grad(self)(0, 0);
    Mat& gz = g.grad_mut(logits);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      const double delta = static_cast<int>(j) == target ? 1.0 : 0.0;
      gz(0, static_cast<Eigen::Index>(j)) += go * coef * (delta - probs[j]);
    }
  });
}

}  // namespace cropid::ad
