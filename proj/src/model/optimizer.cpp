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

#include "cropid/model/optimizer.hpp"

#include <cmath>

#include "cropid/core/error.hpp"

namespace cropid::model {

Adam::Adam(const ad::ParameterSet& params, AdamOptions options)
    : options_(options), m_(ad::Gradients::zeros_like(params)), v_(ad::Gradients::zeros_like(params)) {}

void Adam::step(ad::ParameterSet& params, const ad::Gradients& grads) {
  for (std::size_t i = 0; i < grads.grads.size(); ++i) {
    if (!grads.grads[i].allFinite()) {
      throw Error(ErrorCode::NonFiniteGradient, "non-finite gradient for parameter '" + params.name(i) + "'");
    }
  }
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.grads.size(); ++i) {
    const auto& g = grads.grads[i];
    auto& m = m_.grads[i];
    auto& v = v_.grads[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    params.value(i).array() -=
        options_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + options_.epsilon);
  }
}

}  // namespace cropid::model
