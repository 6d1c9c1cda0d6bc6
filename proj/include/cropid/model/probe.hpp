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

namespace cropid::model {

using Embeddings = std::vector<std::vector<double>>;

/// Euclidean k-NN vote. Neighbours at equal distance are taken in train order; a vote tie goes to
/// the class with the smaller summed neighbour distance, then to the lower class index.
/// Throws Error(ConfigError) when there are fewer than k train points.
std::vector<int> knn_predict(const Embeddings& train, std::span<const int> train_labels, const Embeddings& query,
                             int k = 3);

/// Macro-F1 of knn_predict on the query set.
double knn_probe(const Embeddings& train, std::span<const int> train_labels, const Embeddings& val,
                 std::span<const int> val_labels, int k = 3);

}  // namespace cropid::model
