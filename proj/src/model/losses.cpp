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

#include "cropid/model/losses.hpp"

#include <algorithm>
#include <cmath>

#include "cropid/core/error.hpp"

namespace cropid::model {

double focal_loss(std::span<const double> probs, int true_class, double gamma) {
  const double p = probs[static_cast<std::size_t>(true_class)];
  return -std::pow(1.0 - p, gamma) * std::log(std::max(p, kFocalProbFloor));
}

Var focal_loss(Graph& g, Var logits, int true_class, double gamma) {
  return ad::softmax_focal(g, logits, true_class, gamma);
}

Mat target_matrix(const rsd::PaddedChannel& channel) {
  Mat m(channel.length, channel.features);
  std::copy(channel.values.begin(), channel.values.end(), m.data());
  return m;
}

std::vector<Mat> mae_weights(const rsd::PaddedSeries& target, const std::vector<TokenSequence>& tokens,
                             int steps_per_token) {
  std::vector<Mat> weights;
  double count = 0.0;
  for (std::size_t s = 0; s < target.channels.size(); ++s) {
    const auto& ch = target.channels[s];
    Mat w = Mat::Zero(ch.length, ch.features);
    for (int step = 0; step < ch.length; ++step) {
      const auto t = static_cast<std::size_t>(step / steps_per_token);
      if (ch.valid[static_cast<std::size_t>(step)] && tokens[s].masked[t]) {
        w.row(step).setOnes();
        count += ch.features;
      }
    }
    weights.push_back(std::move(w));
  }
  if (count == 0.0) throw Error(ErrorCode::ZeroMaskLoss, "no masked valid steps to reconstruct");
  for (auto& w : weights) w /= count;
  return weights;
}

Var mae_loss(Graph& g, const std::vector<Var>& reconstruction, const rsd::PaddedSeries& target,
             const std::vector<TokenSequence>& tokens, int steps_per_token) {
  const auto weights = mae_weights(target, tokens, steps_per_token);
  std::vector<Var> terms;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    terms.push_back(ad::weighted_sq_error(g, reconstruction[s], target_matrix(target.channels[s]), weights[s]));
  }
  Var total = terms[0];
  for (std::size_t s = 1; s < terms.size(); ++s) total = ad::add(g, total, terms[s]);
  return total;
}

double mae_loss_value(const std::vector<Mat>& reconstruction, const rsd::PaddedSeries& target,
                      const std::vector<TokenSequence>& tokens, int steps_per_token) {
  const auto weights = mae_weights(target, tokens, steps_per_token);
  double total = 0.0;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    const Mat diff = reconstruction[s] - target_matrix(target.channels[s]);
    total += (diff.array().square() * weights[s].array()).sum();
  }
  return total;
}

}  // namespace cropid::model
