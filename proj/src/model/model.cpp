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

#include "cropid/model/model.hpp"

#include <cmath>
#include <random>

#include "cropid/core/error.hpp"

namespace cropid::model {

namespace {

constexpr double kMaskedScore = -1e9;

Mat normal(int rows, int cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Mat glorot(int fan_in, int fan_out, Rng& rng) { return normal(fan_in, fan_out, 1.0 / std::sqrt(fan_in), rng); }

Mat key_mask(const std::vector<bool>& valid) {
  const auto n = static_cast<Eigen::Index>(valid.size());
  Mat m = Mat::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    if (!valid[static_cast<std::size_t>(c)]) m.col(c).setConstant(kMaskedScore);
  }
  return m;
}

}  // namespace

std::vector<TokenSequence> tokenize(const rsd::PaddedSeries& series, const ModelConfig& config) {
  const int k = config.steps_per_token;
  std::vector<TokenSequence> out;
  out.reserve(series.channels.size());
  for (const auto& ch : series.channels) {
    if (k <= 0 || ch.length % k != 0) {
      throw Error(ErrorCode::ConfigError, ch.satellite + ": length " + std::to_string(ch.length) +
                                              " is not divisible by steps_per_token " + std::to_string(k));
    }
    TokenSequence ts;
    ts.satellite = ch.satellite;
    const int n = ch.length / k;
    ts.inputs = Mat::Zero(n, k * ch.features);
    ts.valid.assign(static_cast<std::size_t>(n), false);
    ts.masked.assign(static_cast<std::size_t>(n), false);
    for (int step = 0; step < ch.length; ++step) {
      if (!ch.valid[static_cast<std::size_t>(step)]) continue;
      const int t = step / k;
      ts.valid[static_cast<std::size_t>(t)] = true;
      for (int f = 0; f < ch.features; ++f) ts.inputs(t, (step % k) * ch.features + f) = ch.at(step, f);
    }
    out.push_back(std::move(ts));
  }
  return out;
}

void mae_mask(TokenSequence& tokens, double mask_prob, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < tokens.valid.size(); ++i) {
    // Draw for every token so the stream position does not depend on validity.
    const double draw = u(rng);
    tokens.masked[i] = tokens.valid[i] && draw < mask_prob;
  }
}

Model::Model(ModelConfig config, rsd::SensorLayout layout) : config_(std::move(config)), layout_(std::move(layout)) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, 0x6d6f64656cULL));
  const int d = config_.token_dim;
  const int n = config_.tokens_per_satellite();
  for (const auto& spec : layout_.satellites) {
    Satellite s;
    s.id = spec.id;
    s.features = spec.feature_count();
    s.tok_w = params_.add(s.id + ".tok.w", glorot(config_.steps_per_token * s.features, d, rng));
    s.tok_b = params_.add(s.id + ".tok.b", Mat::Zero(1, d));
    s.mask = params_.add(s.id + ".mask", normal(1, d, 1.0, rng));
    s.pre_pos = params_.add(s.id + ".pre_pos", normal(n, d, 0.1, rng));
    for (int l = 0; l < config_.pre_fusion_layers; ++l) s.pre.push_back(add_block(s.id + ".pre" + std::to_string(l), rng));
    sats_.push_back(std::move(s));
  }
  post_pos_ = params_.add("post_pos", normal(n * static_cast<int>(sats_.size()), d, 0.1, rng));
  for (int l = 0; l < config_.post_fusion_layers; ++l) post_.push_back(add_block("post" + std::to_string(l), rng));
  final_g_ = params_.add("final_ln.g", Mat::Ones(1, d));
  final_b_ = params_.add("final_ln.b", Mat::Zero(1, d));
  for (auto& s : sats_) {
    const int layers = s.id == rsd::kSentinel1 ? config_.decoder_layers_s1 : config_.decoder_layers_s2;
    s.dec_pos = params_.add(s.id + ".dec_pos", normal(config_.pad_length, d, 0.5, rng));
    for (int l = 0; l < layers; ++l) {
      const std::string pre = s.id + ".dec" + std::to_string(l);
      s.dec.push_back({params_.add(pre + ".w1", glorot(d, d, rng)), params_.add(pre + ".b1", Mat::Zero(1, d)),
                       params_.add(pre + ".w2", normal(d, d, 0.5 / std::sqrt(d), rng)),
                       params_.add(pre + ".b2", Mat::Zero(1, d))});
    }
    s.dec_out_w = params_.add(s.id + ".dec_out.w", glorot(d, s.features, rng));
    s.dec_out_b = params_.add(s.id + ".dec_out.b", Mat::Zero(1, s.features));
  }
  int in = d;
  for (int l = 0; l < config_.classifier_depth; ++l) {
    const std::string pre = "cls" + std::to_string(l);
    cls_hidden_.emplace_back(params_.add(pre + ".w", glorot(in, config_.classifier_width, rng)),
                             params_.add(pre + ".b", Mat::Zero(1, config_.classifier_width)));
    in = config_.classifier_width;
  }
  cls_out_w_ = params_.add("cls_out.w", glorot(in, kNumClasses, rng));
  cls_out_b_ = params_.add("cls_out.b", Mat::Zero(1, kNumClasses));
}

Model::Block Model::add_block(const std::string& prefix, Rng& rng) {
  const int d = config_.token_dim;
  const int a = config_.attention_size;
  const int h = config_.ffn_multiplier * d;
  Block b{};
  b.ln1_g = params_.add(prefix + ".ln1.g", Mat::Ones(1, d));
  b.ln1_b = params_.add(prefix + ".ln1.b", Mat::Zero(1, d));
  b.w_qkv = params_.add(prefix + ".qkv.w", glorot(d, 3 * a, rng));
  b.b_qkv = params_.add(prefix + ".qkv.b", Mat::Zero(1, 3 * a));
  b.w_o = params_.add(prefix + ".o.w", normal(a, d, 0.5 / std::sqrt(a), rng));
  b.b_o = params_.add(prefix + ".o.b", Mat::Zero(1, d));
  b.ln2_g = params_.add(prefix + ".ln2.g", Mat::Ones(1, d));
  b.ln2_b = params_.add(prefix + ".ln2.b", Mat::Zero(1, d));
  b.w1 = params_.add(prefix + ".ff1.w", glorot(d, h, rng));
  b.b1 = params_.add(prefix + ".ff1.b", Mat::Zero(1, h));
  b.w2 = params_.add(prefix + ".ff2.w", normal(h, d, 0.5 / std::sqrt(h), rng));
  b.b2 = params_.add(prefix + ".ff2.b", Mat::Zero(1, d));
  return b;
}

Var Model::block_forward(Graph& g, const Block& b, Var x, const Mat& mask) const {
  const int a = config_.attention_size;
  const int dh = config_.head_dim();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  const Var h = ad::layer_norm(g, x, p(g, b.ln1_g), p(g, b.ln1_b));
  const Var qkv = ad::linear(g, h, p(g, b.w_qkv), p(g, b.b_qkv));
  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(config_.attention_heads));
  for (int i = 0; i < config_.attention_heads; ++i) {
    const Var q = ad::slice_cols(g, qkv, i * dh, dh);
    const Var k = ad::slice_cols(g, qkv, a + i * dh, dh);
    const Var v = ad::slice_cols(g, qkv, 2 * a + i * dh, dh);
    Var s = ad::scale(g, ad::matmul_nt(g, q, k), inv_sqrt);
    s = ad::add_const(g, s, mask);
    heads.push_back(ad::matmul(g, ad::softmax_rows(g, s), v));
  }
  const Var attn = ad::linear(g, ad::concat_cols(g, heads), p(g, b.w_o), p(g, b.b_o));
  const Var x1 = ad::add(g, x, attn);
  const Var h2 = ad::layer_norm(g, x1, p(g, b.ln2_g), p(g, b.ln2_b));
  const Var f = ad::linear(g, ad::gelu(g, ad::linear(g, h2, p(g, b.w1), p(g, b.b1))), p(g, b.w2), p(g, b.b2));
  return ad::add(g, x1, f);
}

Encoded Model::encode(Graph& g, const std::vector<TokenSequence>& tokens) const {
  if (tokens.size() != sats_.size()) {
    throw Error(ErrorCode::ConfigError, "expected " + std::to_string(sats_.size()) + " token sequences");
  }
  std::vector<Var> per_sat;
  std::vector<bool> all_valid;
  for (std::size_t i = 0; i < sats_.size(); ++i) {
    const Satellite& s = sats_[i];
    const TokenSequence& ts = tokens[i];
    if (ts.size() != config_.tokens_per_satellite()) {
      throw Error(ErrorCode::ConfigError, s.id + ": expected " + std::to_string(config_.tokens_per_satellite()) + " tokens");
    }
    Var e = ad::linear(g, g.constant(ts.inputs), p(g, s.tok_w), p(g, s.tok_b));
    bool any_masked = false;
    for (bool m : ts.masked) any_masked = any_masked || m;
    if (any_masked) e = ad::replace_rows(g, e, p(g, s.mask), ts.masked);
    e = ad::add(g, e, p(g, s.pre_pos));
    const Mat mask = key_mask(ts.valid);
    for (const auto& b : s.pre) e = block_forward(g, b, e, mask);
    per_sat.push_back(e);
    all_valid.insert(all_valid.end(), ts.valid.begin(), ts.valid.end());
  }
  std::size_t n_valid = 0;
  for (bool v : all_valid) n_valid += v ? 1 : 0;
  if (n_valid == 0) throw Error(ErrorCode::EmptyInput, "no valid tokens in any satellite");

  Var x = per_sat.size() == 1 ? per_sat[0] : ad::concat_rows(g, per_sat);
  x = ad::add(g, x, p(g, post_pos_));
  const Mat mask = key_mask(all_valid);
  for (const auto& b : post_) x = block_forward(g, b, x, mask);
  x = ad::layer_norm(g, x, p(g, final_g_), p(g, final_b_));
  std::vector<double> w(all_valid.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = all_valid[i] ? 1.0 / static_cast<double>(n_valid) : 0.0;
  return Encoded{ad::weighted_sum_rows(g, x, w), x, std::move(all_valid)};
}

std::vector<Var> Model::decode(Graph& g, Var pooled) const {
  std::vector<Var> out;
  for (const auto& s : sats_) {
    Var h = ad::add(g, ad::broadcast_rows(g, pooled, config_.pad_length), p(g, s.dec_pos));
    for (const auto& l : s.dec) {
      const Var t = ad::linear(g, ad::gelu(g, ad::linear(g, h, p(g, l[0]), p(g, l[1]))), p(g, l[2]), p(g, l[3]));
      h = ad::add(g, h, t);
    }
    out.push_back(ad::linear(g, h, p(g, s.dec_out_w), p(g, s.dec_out_b)));
  }
  return out;
}

Var Model::classify_logits(Graph& g, Var pooled, Rng* dropout_rng) const {
  Var x = pooled;
  const double rate = config_.classifier_dropout;
  for (const auto& [w, b] : cls_hidden_) {
    x = ad::gelu(g, ad::linear(g, x, p(g, w), p(g, b)));
    if (dropout_rng != nullptr && rate > 0.0) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      Mat keep(1, g.value(x).cols());
      for (Eigen::Index i = 0; i < keep.size(); ++i) keep(0, i) = u(*dropout_rng) < rate ? 0.0 : 1.0 / (1.0 - rate);
      x = ad::mul_const(g, x, keep);
    }
  }
  return ad::linear(g, x, p(g, cls_out_w_), p(g, cls_out_b_));
}

std::vector<double> Model::embed(const rsd::PaddedSeries& series) const {
  Graph g(false);
  const auto enc = encode(g, tokenize(series, config_));
  const Mat& v = g.value(enc.pooled);
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::array<double, kNumClasses> Model::predict_proba(const rsd::PaddedSeries& series) const {
  Graph g(false);
  const auto enc = encode(g, tokenize(series, config_));
  const Mat& z = g.value(classify_logits(g, enc.pooled));
  const auto probs = ad::softmax(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
  std::array<double, kNumClasses> out{};
  std::copy(probs.begin(), probs.end(), out.begin());
  return out;
}

void Model::reset_classifier(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x636c73ULL));
  for (const auto& [w, b] : cls_hidden_) {
    params_.value(w) = glorot(static_cast<int>(params_.value(w).rows()), static_cast<int>(params_.value(w).cols()), rng);
    params_.value(b).setZero();
  }
  params_.value(cls_out_w_) =
      glorot(static_cast<int>(params_.value(cls_out_w_).rows()), kNumClasses, rng);
  params_.value(cls_out_b_).setZero();
}

}  // namespace cropid::model
