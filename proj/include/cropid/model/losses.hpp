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

#include <span>
#include <vector>

#include "cropid/model/model.hpp"

namespace cropid::model {

inline constexpr double kFocalProbFloor = 1e-12;

/// -(1 - p_t)^gamma log(max(p_t, 1e-12)) for a probability vector.
double focal_loss(std::span<const double> probs, int true_class, double gamma);

/// Focal loss of softmax(logits) on the graph (gamma = 0 is cross-entropy).
Var focal_loss(Graph& g, Var logits, int true_class, double gamma);

/// Per-satellite element weights for the masked reconstruction loss: 1/N on every feature of every
/// valid step inside a masked token, 0 elsewhere, N being the total number of such elements.
/// Throws Error(ZeroMaskLoss) when N = 0.
std::vector<Mat> mae_weights(const rsd::PaddedSeries& target, const std::vector<TokenSequence>& tokens,
                             int steps_per_token);

/// Mean squared error over masked-and-valid elements across all satellites.
Var mae_loss(Graph& g, const std::vector<Var>& reconstruction, const rsd::PaddedSeries& target,
             const std::vector<TokenSequence>& tokens, int steps_per_token);

/// Same quantity without a graph.
double mae_loss_value(const std::vector<Mat>& reconstruction, const rsd::PaddedSeries& target,
                      const std::vector<TokenSequence>& tokens, int steps_per_token);

Mat target_matrix(const rsd::PaddedChannel& channel);

}  // namespace cropid::model
