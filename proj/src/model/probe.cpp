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

#include "cropid/model/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cropid/core/error.hpp"
#include "cropid/eval/metrics.hpp"

namespace cropid::model {

std::vector<int> knn_predict(const Embeddings& train, std::span<const int> train_labels, const Embeddings& query,
                             int k) {
  if (k < 1 || train.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::ConfigError, "k-NN probe needs at least " + std::to_string(k) + " train points, got " +
                                            std::to_string(train.size()));
  }
  std::vector<int> out;
  out.reserve(query.size());
  std::vector<std::pair<double, std::size_t>> dist(train.size());
  for (const auto& q : query) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double diff = q[j] - train[i][j];
        d2 += diff * diff;
      }
      dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::map<int, std::pair<int, double>> votes;  // class -> (count, summed distance)
    for (int n = 0; n < k; ++n) {
      auto& v = votes[train_labels[dist[static_cast<std::size_t>(n)].second]];
      ++v.first;
      v.second += std::sqrt(dist[static_cast<std::size_t>(n)].first);
    }
    int best = -1;
    std::pair<int, double> best_vote{0, 0.0};
    for (const auto& [cls, vote] : votes) {
      if (best < 0 || vote.first > best_vote.first ||
          (vote.first == best_vote.first && vote.second < best_vote.second)) {
        best = cls;
        best_vote = vote;
      }
    }
    out.push_back(best);
  }
  return out;
}

double knn_probe(const Embeddings& train, std::span<const int> train_labels, const Embeddings& val,
                 std::span<const int> val_labels, int k) {
  const auto pred = knn_predict(train, train_labels, val, k);
  return eval::macro_f1(val_labels, pred);
}

}  // namespace cropid::model
