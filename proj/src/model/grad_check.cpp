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

#include "cropid/model/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cropid/core/error.hpp"
#include "cropid/core/parallel.hpp"
#include "cropid/model/losses.hpp"
#include "cropid/model/model.hpp"

namespace cropid::model {

using ad::Graph;
using ad::Mat;
using ad::ParameterSet;
using ad::Var;

GradCheckResult grad_check(const ScalarFn& f, ParameterSet& params, double eps, std::size_t max_per_param,
                           std::uint64_t seed) {
  Graph g;
  const Var loss = f(g, params);
  g.backward(loss);
  ad::Gradients grads = ad::Gradients::zeros_like(params);
  g.accumulate(grads);

  auto eval = [&]() {
    Graph h(false);
    return h.scalar(f(h, params));
  };
  Rng rng(seed);
  GradCheckResult out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat& value = params.value(i);
    std::vector<Eigen::Index> elems(static_cast<std::size_t>(value.size()));
    for (Eigen::Index e = 0; e < value.size(); ++e) elems[static_cast<std::size_t>(e)] = e;
    if (max_per_param > 0 && elems.size() > max_per_param) {
      for (std::size_t k = 0; k < max_per_param; ++k) {
        std::swap(elems[k], elems[k + static_cast<std::size_t>(rng() % (elems.size() - k))]);
      }
      elems.resize(max_per_param);
    }
    for (Eigen::Index e : elems) {
      const double orig = value.data()[e];
      value.data()[e] = orig + eps;
      const double up = eval();
      value.data()[e] = orig - eps;
      const double down = eval();
      value.data()[e] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = grads.grads[i].data()[e];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      const double rel = std::abs(analytic - numeric) / denom;
      ++out.checked;
      if (rel > out.max_rel_error || std::isnan(rel)) {
        out.max_rel_error = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
        out.worst = params.name(i) + "[" + std::to_string(e) + "]";
      }
    }
  }
  return out;
}

namespace {

Mat random_mat(int rows, int cols, Rng& rng, double stddev = 1.0) {
  std::normal_distribution<double> d(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

int pick(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); }

/// Scalar readout sum(out * R) with a fixed random R, so every output element matters.
Var readout(Graph& g, Var out, const Mat& r) { return ad::sum(g, ad::mul_const(g, out, r)); }

rsd::PaddedSeries random_series(const rsd::SensorLayout& layout, int length, Rng& rng) {
  rsd::PaddedSeries s;
  std::normal_distribution<double> d(0.0, 1.0);
  const int first_valid = pick(rng, 0, length / 2);
  for (const auto& spec : layout.satellites) {
    rsd::PaddedChannel ch;
    ch.satellite = spec.id;
    ch.length = length;
    ch.features = spec.feature_count();
    ch.values.assign(static_cast<std::size_t>(length * ch.features), 0.0);
    ch.valid.assign(static_cast<std::size_t>(length), false);
    for (int t = first_valid; t < length; ++t) {
      ch.valid[static_cast<std::size_t>(t)] = true;
      for (int f = 0; f < ch.features; ++f) ch.at(t, f) = d(rng);
    }
    s.channels.push_back(std::move(ch));
  }
  return s;
}

ModelConfig small_config(Rng& rng) {
  ModelConfig c;
  c.token_dim = 8;
  c.attention_heads = 2;
  c.attention_size = 8;
  c.steps_per_token = pick(rng, 0, 1) == 0 ? 2 : 4;
  c.pad_length = 16;
  c.pre_fusion_layers = 1;
  c.post_fusion_layers = 1;
  c.decoder_layers_s1 = 1;
  c.decoder_layers_s2 = 1;
  c.classifier_depth = 1;
  c.classifier_width = 8;
  c.seed = rng();
  return c;
}

/// Gradient check of a whole Model-based loss over a sample of each parameter's elements.
GradCheckResult check_model(Model& model, const std::function<Var(Graph&, const Model&)>& f, double eps,
                            std::uint64_t seed) {
  // The model reads its own ParameterSet; bind the checked set to it.
  ParameterSet& params = model.params();
  return grad_check([&](Graph& g, const ParameterSet&) { return f(g, model); }, params, eps, 6, seed);
}

}  // namespace

const std::vector<std::string>& grad_check_modules() {
  static const std::vector<std::string> kModules = {
      "linear",       "matmul_nt",    "gelu",         "layer_norm", "softmax_rows", "concat_slice",
      "replace_rows", "pooling",      "broadcast",    "attention",  "encoder_block", "encoder",
      "decoder",      "classifier",   "mae_loss",     "focal_loss",
  };
  return kModules;
}

GradCheckResult grad_check_module(const std::string& module, std::uint64_t seed, double eps) {
  Rng rng(derive_seed(seed, 0x6763ULL));
  const int n = pick(rng, 2, 6);
  const int k = pick(rng, 2, 7);
  const int m = pick(rng, 2, 7);
  ParameterSet ps;

  if (module == "linear") {
    ps.add("x", random_mat(n, k, rng));
    ps.add("w", random_mat(k, m, rng));
    ps.add("b", random_mat(1, m, rng));
    const Mat r = random_mat(n, m, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      return readout(g, ad::linear(g, g.param(p, 0), g.param(p, 1), g.param(p, 2)), r);
    }, ps, eps);
  }
  if (module == "matmul_nt") {
    ps.add("a", random_mat(n, k, rng));
    ps.add("b", random_mat(m, k, rng));
    ps.add("c", random_mat(k, m, rng));
    const Mat r1 = random_mat(n, m, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      const Var x = ad::matmul_nt(g, g.param(p, 0), g.param(p, 1));
      const Var y = ad::matmul(g, g.param(p, 0), g.param(p, 2));
      return readout(g, ad::add(g, x, ad::scale(g, y, 0.5)), r1);
    }, ps, eps);
  }
  if (module == "gelu") {
    ps.add("x", random_mat(n, k, rng, 2.0));
    const Mat r = random_mat(n, k, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) { return readout(g, ad::gelu(g, g.param(p, 0)), r); }, ps,
                      eps);
  }
  if (module == "layer_norm") {
    ps.add("x", random_mat(n, k, rng, 2.0));
    ps.add("gamma", random_mat(1, k, rng));
    ps.add("beta", random_mat(1, k, rng));
    const Mat r = random_mat(n, k, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      return readout(g, ad::layer_norm(g, g.param(p, 0), g.param(p, 1), g.param(p, 2)), r);
    }, ps, eps);
  }
  if (module == "softmax_rows") {
    ps.add("x", random_mat(n, k, rng, 2.0));
    const Mat r = random_mat(n, k, rng);
    Mat mask = Mat::Zero(n, k);
    mask(0, k - 1) = -1e9;
    return grad_check([&](Graph& g, const ParameterSet& p) {
      return readout(g, ad::softmax_rows(g, ad::add_const(g, g.param(p, 0), mask)), r);
    }, ps, eps);
  }
  if (module == "concat_slice") {
    ps.add("a", random_mat(n, k, rng));
    ps.add("b", random_mat(n, m, rng));
    ps.add("c", random_mat(2, k + m, rng));
    const Mat r = random_mat(n + 2, 2, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      const Var ab = ad::concat_cols(g, std::vector<Var>{g.param(p, 0), g.param(p, 1)});
      const Var abc = ad::concat_rows(g, std::vector<Var>{ab, g.param(p, 2)});
      return readout(g, ad::slice_cols(g, abc, 1, 2), r);
    }, ps, eps);
  }
  if (module == "replace_rows") {
    ps.add("x", random_mat(n, k, rng));
    ps.add("row", random_mat(1, k, rng));
    std::vector<bool> flags(static_cast<std::size_t>(n));
    for (auto&& f : flags) f = rng() % 2 == 0;
    flags[0] = true;
    const Mat r = random_mat(n, k, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      return readout(g, ad::replace_rows(g, g.param(p, 0), g.param(p, 1), flags), r);
    }, ps, eps);
  }
  if (module == "pooling") {
    ps.add("x", random_mat(n, k, rng));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& v : w) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Mat r = random_mat(1, k, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      return readout(g, ad::weighted_sum_rows(g, g.param(p, 0), w), r);
    }, ps, eps);
  }
  if (module == "broadcast") {
    ps.add("row", random_mat(1, k, rng));
    ps.add("x", random_mat(n, k, rng));
    const Mat r = random_mat(n, k, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      const Var b = ad::broadcast_rows(g, g.param(p, 0), n);
      return readout(g, ad::add_row(g, ad::add(g, b, g.param(p, 1)), g.param(p, 0)), r);
    }, ps, eps);
  }
  if (module == "attention") {
    // Single-head scaled dot-product attention with a key mask.
    ps.add("q", random_mat(n, k, rng));
    ps.add("k", random_mat(n, k, rng));
    ps.add("v", random_mat(n, m, rng));
    Mat mask = Mat::Zero(n, n);
    mask.col(n - 1).setConstant(-1e9);
    const Mat r = random_mat(n, m, rng);
    return grad_check([&](Graph& g, const ParameterSet& p) {
      Var s = ad::scale(g, ad::matmul_nt(g, g.param(p, 0), g.param(p, 1)), 1.0 / std::sqrt(static_cast<double>(k)));
      s = ad::add_const(g, s, mask);
      return readout(g, ad::matmul(g, ad::softmax_rows(g, s), g.param(p, 2)), r);
    }, ps, eps);
  }
  if (module == "focal_loss") {
    const int classes = pick(rng, 2, 13);
    ps.add("logits", random_mat(1, classes, rng, 2.0));
    const int target = pick(rng, 0, classes - 1);
    const double gammas[] = {0.0, 1.5, 2.0, 0.5, 3.0};
    const double gamma = gammas[rng() % 5];
    return grad_check([&](Graph& g, const ParameterSet& p) {
      return ad::softmax_focal(g, g.param(p, 0), target, gamma);
    }, ps, eps);
  }

  // Model-level checks on a small architecture.
  ModelConfig cfg = small_config(rng);
  rsd::SensorLayout layout = rsd::SensorLayout::defaults();
  if (module == "encoder_block") {
    cfg.post_fusion_layers = 0;
    layout.satellites.resize(1);
  }
  Model model(cfg, layout);
  const rsd::PaddedSeries series = random_series(layout, cfg.pad_length, rng);
  auto tokens = tokenize(series, cfg);
  const Mat r = random_mat(1, cfg.token_dim, rng);
  const std::uint64_t check_seed = rng();

  if (module == "encoder_block" || module == "encoder") {
    return check_model(model, [&](Graph& g, const Model& mdl) {
      const auto enc = mdl.encode(g, tokens);
      const Mat rl = Mat::Ones(g.value(enc.latents).rows(), g.value(enc.latents).cols());
      return ad::add(g, readout(g, enc.pooled, r), ad::scale(g, readout(g, enc.latents, rl), 0.1));
    }, eps, check_seed);
  }
  if (module == "decoder") {
    std::vector<Mat> rs;
    for (const auto& spec : layout.satellites) rs.push_back(random_mat(cfg.pad_length, spec.feature_count(), rng));
    return check_model(model, [&](Graph& g, const Model& mdl) {
      const auto enc = mdl.encode(g, tokens);
      const auto rec = mdl.decode(g, enc.pooled);
      Var total = readout(g, rec[0], rs[0]);
      for (std::size_t s = 1; s < rec.size(); ++s) total = ad::add(g, total, readout(g, rec[s], rs[s]));
      return total;
    }, eps, check_seed);
  }
  if (module == "classifier") {
    const int target = pick(rng, 0, kNumClasses - 1);
    return check_model(model, [&](Graph& g, const Model& mdl) {
      const auto enc = mdl.encode(g, tokens);
      return focal_loss(g, mdl.classify_logits(g, enc.pooled), target, cfg.focal_gamma);
    }, eps, check_seed);
  }
  if (module == "mae_loss") {
    Rng mask_rng(check_seed);
    for (auto& ts : tokens) mae_mask(ts, 0.5, mask_rng);
    tokens[0].masked[tokens[0].masked.size() - 1] = true;
    return check_model(model, [&](Graph& g, const Model& mdl) {
      const auto enc = mdl.encode(g, tokens);
      return mae_loss(g, mdl.decode(g, enc.pooled), series, tokens, cfg.steps_per_token);
    }, eps, check_seed);
  }
  throw Error(ErrorCode::ConfigError, "unknown grad-check module '" + module + "'");
}

}  // namespace cropid::model
