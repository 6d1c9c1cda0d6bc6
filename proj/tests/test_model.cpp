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

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

#include "cropid/eval/metrics.hpp"
#include "cropid/model/checkpoint.hpp"
#include "cropid/model/grad_check.hpp"
#include "cropid/model/losses.hpp"
#include "cropid/model/optimizer.hpp"
#include "cropid/model/probe.hpp"
#include "cropid/model/train.hpp"

using namespace cropid;
using namespace cropid::model;
using cropid::test::expect_error;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.token_dim = 8;
  c.attention_heads = 2;
  c.attention_size = 8;
  c.pad_length = 16;
  c.pre_fusion_layers = 1;
  c.post_fusion_layers = 1;
  c.decoder_layers_s1 = 1;
  c.decoder_layers_s2 = 1;
  c.classifier_depth = 1;
  c.classifier_width = 8;
  c.batch_size = 8;
  c.validate_every = 5;
  c.seed = 3;
  return c;
}

/// Random padded input for the default layout; steps before `first_valid` are padding.
rsd::PaddedSeries random_input(int length, int first_valid, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  rsd::PaddedSeries s;
  for (const auto& sat : rsd::SensorLayout::defaults().satellites) {
    rsd::PaddedChannel c;
    c.satellite = sat.id;
    c.length = length;
    c.features = sat.feature_count();
    c.values.assign(static_cast<std::size_t>(length * c.features), 0.0);
    c.valid.assign(static_cast<std::size_t>(length), false);
    for (int t = first_valid; t < length; ++t) {
      c.valid[static_cast<std::size_t>(t)] = true;
      for (int f = 0; f < c.features; ++f) c.at(t, f) = n(rng);
    }
    s.channels.push_back(c);
  }
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("configuration domains") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate_domains());
  CHECK(c.learning_rate == 0.0002);
  CHECK(apply_key_value(c, "tokenizer_num_time_steps", "5"));
  expect_error(ErrorCode::ConfigError, [&] { c.validate_domains(); });
  CHECK_FALSE(apply_key_value(c, "no_such_key", "1"));
  expect_error(ErrorCode::ConfigError, [&] { apply_key_value(c, "token_dimension", "sixty"); });
  ModelConfig d;
  d.pad_length = 78;
  expect_error(ErrorCode::ConfigError, [&] { d.validate(); });
  const auto kv = to_key_values(ModelConfig{});
  CHECK(std::stod(kv.at("adam_learning_rate")) == 0.0002);
}

TEST_CASE("tokenization") {
  ModelConfig c;
  const auto input = random_input(80, 30, 1);
  auto t4 = tokenize(input, c);
  REQUIRE(t4.size() == 2);
  CHECK(t4[0].size() == 20);
  CHECK(t4[0].inputs.cols() == 4 * 5);
  c.steps_per_token = 8;
  CHECK(tokenize(input, c)[0].size() == 10);
  // Token i covers steps [4i, 4i + 4): step 30 makes token 7 valid, token 6 not.
  CHECK_FALSE(t4[0].valid[6]);
  CHECK(t4[0].valid[7]);
  for (const auto& ts : tokenize(random_input(80, 80, 1), ModelConfig{})) {
    for (bool v : ts.valid) CHECK_FALSE(v);
  }
  expect_error(ErrorCode::ConfigError, [] { tokenize(random_input(78, 0, 1), ModelConfig{}); });
}

TEST_CASE("encoder ignores padded steps and needs a valid token") {
  const Model m(tiny_config(), rsd::SensorLayout::defaults());
  auto a = random_input(16, 6, 4);
  auto b = a;
  for (auto& ch : b.channels) {
    for (int t = 0; t < 4; ++t) {
      for (int f = 0; f < ch.features; ++f) ch.at(t, f) = 1e3 * (t + 1);
    }
  }
  // Steps 4 and 5 share a token with valid steps 6 and 7; only fully padded tokens are free to change.
  CHECK(max_abs_diff(m.embed(a), m.embed(b)) < 1e-9);
  const auto pa = m.predict_proba(a);
  const auto pb = m.predict_proba(b);
  for (int k = 0; k < kNumClasses; ++k) CHECK(std::abs(pa[k] - pb[k]) < 1e-9);
  expect_error(ErrorCode::EmptyInput, [&] { m.embed(random_input(16, 16, 4)); });
  const Model m2(tiny_config(), rsd::SensorLayout::defaults());
  CHECK(m2.embed(a) == m.embed(a));
}

TEST_CASE("broadcast decoder is independent per position") {
  Model m(tiny_config(), rsd::SensorLayout::defaults());
  const auto input = random_input(16, 0, 8);
  auto decode_values = [&](const Model& model) {
    Graph g(false);
    const auto enc = model.encode(g, tokenize(input, model.config()));
    std::vector<Mat> out;
    for (Var v : model.decode(g, enc.pooled)) out.push_back(g.value(v));
    return out;
  };
  const auto base = decode_values(m);
  REQUIRE(base.size() == 2);
  CHECK(base[0].rows() == 16);
  CHECK(base[0].cols() == 5);
  CHECK(base[1].cols() == 2);

  Model z = m;
  z.params().value(z.params().index_of("S2.dec_pos")).row(5).setZero();
  const auto changed = decode_values(z);
  for (int r = 0; r < 16; ++r) {
    const double d = (changed[0].row(r) - base[0].row(r)).cwiseAbs().maxCoeff();
    if (r == 5) CHECK(d > 1e-6);
    else CHECK(d < 1e-12);
  }
  CHECK((changed[1] - base[1]).cwiseAbs().maxCoeff() < 1e-12);

  Model same = m;
  auto& pos = same.params().value(same.params().index_of("S1.dec_pos"));
  for (int r = 1; r < pos.rows(); ++r) pos.row(r) = pos.row(0);
  const auto flat = decode_values(same);
  for (int r = 1; r < 16; ++r) CHECK((flat[1].row(r) - flat[1].row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mae masking statistics") {
  Rng rng(12);
  TokenSequence ts;
  ts.valid.assign(10000, true);
  ts.masked.assign(10000, false);
  mae_mask(ts, 0.0, rng);
  for (bool m : ts.masked) CHECK_FALSE(m);
  mae_mask(ts, 0.75, rng);
  double frac = 0.0;
  for (bool m : ts.masked) frac += m ? 1.0 : 0.0;
  CHECK(std::abs(frac / 10000.0 - 0.75) <= 0.02);

  // Independence across satellites: correlation of indicators drawn through draw_mae_masks.
  ModelConfig c;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  const int n = 4000;
  auto input = random_input(80, 0, 2);
  for (int i = 0; i < n; ++i) {
    auto tokens = tokenize(input, c);
    Rng r(derive_seed(77, static_cast<std::uint64_t>(i)));
    draw_mae_masks(tokens, c, r);
    const double a = tokens[0].masked[3] ? 1 : 0;
    const double b = tokens[1].masked[3] ? 1 : 0;
    sa += a, sb += b, sab += a * b, saa += a * a, sbb += b * b;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) * (sbb / n - (sb / n) * (sb / n)));
  CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("masked reconstruction loss") {
  ModelConfig c;
  c.pad_length = 8;
  const auto target = random_input(8, 0, 5);
  auto tokens = tokenize(target, c);
  std::vector<Mat> recon;
  for (const auto& ch : target.channels) recon.push_back(target_matrix(ch));

  expect_error(ErrorCode::ZeroMaskLoss, [&] { mae_loss_value(recon, target, tokens, 4); });
  tokens[0].masked[1] = true;
  CHECK(mae_loss_value(recon, target, tokens, 4) == 0.0);

  auto perturbed = target;
  perturbed.channels[0].at(0, 0) += 3.0;  // token 0 is not masked
  perturbed.channels[1].at(6, 1) -= 2.0;
  CHECK(mae_loss_value(recon, perturbed, tokens, 4) == 0.0);

  // One masked scalar with difference 2.
  rsd::PaddedChannel single;
  single.satellite = "X";
  single.length = 8;
  single.features = 1;
  single.values.assign(8, 0.5);
  single.valid.assign(8, false);
  single.valid[2] = true;
  const rsd::PaddedSeries one{{single}};
  auto t1 = tokenize(one, c);
  t1[0].masked[0] = true;
  std::vector<Mat> r1 = {target_matrix(single)};
  r1[0](2, 0) += 2.0;
  r1[0](5, 0) += 9.0;  // valid is false there
  CHECK(mae_loss_value(r1, one, t1, 4) == doctest::Approx(4.0));
}

TEST_CASE("classifier output is a distribution") {
  Model m(tiny_config(), rsd::SensorLayout::defaults());
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = m.predict_proba(random_input(16, static_cast<int>(s % 10), s));
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  m.params().value(m.params().index_of("cls_out.w")).setZero();
  for (double v : m.predict_proba(random_input(16, 0, 1))) CHECK(v == doctest::Approx(1.0 / 13.0));
  const std::vector<double> z = {0.3, -1.0, 2.5, 0.1};
  std::vector<double> shifted = z;
  for (auto& v : shifted) v += 7.0;
  CHECK(eval::predicted_class(ad::softmax(z)) == eval::predicted_class(ad::softmax(shifted)));
}

TEST_CASE("focal loss values") {
  const std::vector<double> half = {0.5, 0.5};
  CHECK(focal_loss(half, 0, 0.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  CHECK(focal_loss(half, 0, 2.0) == doctest::Approx(0.25 * std::numbers::ln2).epsilon(1e-12));
  const std::vector<double> sure = {1.0, 0.0};
  CHECK(focal_loss(sure, 0, 2.0) == 0.0);
  CHECK(std::isfinite(focal_loss(sure, 1, 2.0)));
  CHECK(focal_loss(sure, 1, 0.0) == doctest::Approx(-std::log(1e-12)));

  Graph g;
  Mat row(1, 3);
  row << 0.2, -0.4, 1.1;
  const Var logits = g.leaf(row);
  const double ce = g.scalar(focal_loss(g, logits, 2, 0.0));
  const auto p = ad::softmax(std::vector<double>{0.2, -0.4, 1.1});
  CHECK(std::abs(ce + std::log(p[2])) < 1e-12);
}

TEST_CASE("adam updates") {
  ad::ParameterSet ps;
  ps.add("w", Mat::Constant(1, 3, 0.5));
  Adam adam(ps);
  CHECK(adam.options().learning_rate == 0.0002);
  auto g = ad::Gradients::zeros_like(ps);
  adam.step(ps, g);
  CHECK(ps.value(0)(0, 0) == 0.5);
  g.grads[0].setConstant(0.3);
  double prev = ps.value(0)(0, 1);
  for (int i = 0; i < 20; ++i) {
    adam.step(ps, g);
    CHECK(ps.value(0)(0, 1) < prev);
    prev = ps.value(0)(0, 1);
  }
  const Mat before = ps.value(0);
  g.grads[0](0, 2) = std::nan("");
  expect_error(ErrorCode::NonFiniteGradient, [&] { adam.step(ps, g); });
  CHECK(ps.value(0) == before);
}

TEST_CASE("gradient checks of the layers") {
  CHECK(grad_check_module("linear", 1).max_rel_error < 1e-6);
  CHECK(grad_check_module("encoder_block", 2).max_rel_error < 1e-3);
  CHECK(grad_check_module("focal_loss", 3).max_rel_error < 1e-5);
  expect_error(ErrorCode::ConfigError, [] { grad_check_module("conv3d", 1); });
  for (const auto& name : grad_check_modules()) {
    const auto r = grad_check_module(name, 11);
    CHECK_MESSAGE(r.max_rel_error < 1e-3, name << " worst " << r.worst);
    CHECK(r.checked > 0);
  }
}

TEST_CASE("k nearest neighbour probe") {
  const Embeddings train = {{0, 0}, {0, 1}, {5, 5}, {5, 6}, {10, 0}};
  const std::vector<int> labels = {0, 0, 1, 1, 2};
  CHECK(knn_predict(train, labels, {{0, 0.5}}, 3)[0] == 0);
  CHECK(knn_predict(train, labels, train, 1) == labels);
  // Two votes each for classes 1 and 0 at k=4 ... the closer pair wins.
  const Embeddings tie_train = {{1, 0}, {-1, 0}, {0, 3}, {0, -3}};
  const std::vector<int> tie_labels = {1, 1, 0, 0};
  CHECK(knn_predict(tie_train, tie_labels, {{0, 0}}, 4)[0] == 1);
  CHECK(knn_probe(train, labels, train, labels, 1) == 1.0);
  expect_error(ErrorCode::ConfigError, [&] { knn_predict({{0, 0}}, std::vector<int>{0}, {{1, 1}}, 3); });
}

TEST_CASE("checkpoints round-trip losslessly") {
  Model m(tiny_config(), rsd::SensorLayout::defaults());
  rsd::NormStats st{{{"S2", {0.1, 0.2, 0.3, 0.4, 0.5}, {1, 2, 3, 4, 5}}, {"S1", {-14, -22}, {1.5, 2.5}}}};
  const auto ck = make_checkpoint(m, "finetune", 40, std::nan(""), st);
  const auto back = checkpoint_from_json(nlohmann::json::parse(to_json(ck).dump()));
  CHECK(back.kind == "finetune");
  CHECK(back.step == 40);
  CHECK(std::isnan(back.selection_score));
  CHECK(back.config == m.config());
  REQUIRE(back.params.size() == m.params().size());
  for (std::size_t i = 0; i < back.params.size(); ++i) CHECK(back.params.value(i) == m.params().value(i));
  CHECK(back.norm_stats.satellites[1].stddev == st.satellites[1].stddev);
  const Model r = model_from_checkpoint(back);
  const auto in = random_input(16, 3, 2);
  CHECK(r.embed(in) == m.embed(in));

  ModelConfig other = tiny_config();
  other.classifier_width = 16;
  Model o(other, rsd::SensorLayout::defaults());
  const std::size_t copied = load_matching(o.params(), m.params());
  CHECK(copied > 0);
  CHECK(copied < m.params().size());
  CHECK(o.embed(in) == m.embed(in));
}

namespace {

struct TinyData {
  std::vector<rsd::PaddedSeries> series;
  std::vector<int> labels;
  LabeledView view() const {
    LabeledView v;
    for (std::size_t i = 0; i < series.size(); ++i) {
      v.series.push_back(&series[i]);
      v.labels.push_back(labels[i]);
    }
    return v;
  }
};

/// Three classes separated by a per-class offset on every valid input.
TinyData tiny_data(int n, std::uint64_t seed) {
  TinyData d;
  for (int i = 0; i < n; ++i) {
    auto s = random_input(16, 4, seed * 1000 + static_cast<std::uint64_t>(i));
    const int label = i % 3;
    for (auto& ch : s.channels) {
      for (int t = 4; t < 16; ++t) {
        for (int f = 0; f < ch.features; ++f) ch.at(t, f) = 0.3 * ch.at(t, f) + 2.0 * (label - 1);
      }
    }
    d.series.push_back(std::move(s));
    d.labels.push_back(label);
  }
  return d;
}

}  // namespace

TEST_CASE("training is deterministic across thread counts and selects by validation F1") {
  const auto train = tiny_data(30, 1);
  const auto val = tiny_data(15, 2);
  TrainOptions opt;
  opt.steps = 15;
  opt.batch_size = 8;
  opt.validate_every = 5;
  Model a(tiny_config(), rsd::SensorLayout::defaults());
  Model b(tiny_config(), rsd::SensorLayout::defaults());
  opt.threads = 1;
  const auto ra = finetune(a, train.view(), val.view(), opt);
  opt.threads = 3;
  const auto rb = finetune(b, train.view(), val.view(), opt);
  REQUIRE(a.params().size() == b.params().size());
  for (std::size_t i = 0; i < a.params().size(); ++i) CHECK(a.params().value(i) == b.params().value(i));
  CHECK(ra.best_step == rb.best_step);
  CHECK(ra.history.size() == 4);
  CHECK(ra.best_score == evaluate_f1(a, val.view()));
  for (const auto& h : ra.history) CHECK(h.score <= ra.best_score);

  std::vector<const rsd::PaddedSeries*> pool;
  for (const auto& s : train.series) pool.push_back(&s);
  Model p(tiny_config(), rsd::SensorLayout::defaults());
  opt.steps = 10;
  const auto rp = pretrain(p, pool, train.view(), val.view(), pool, opt);
  CHECK(rp.best_score >= rp.history.front().score);
  CHECK(rp.history.front().heldout_mse > 0.0);
}
