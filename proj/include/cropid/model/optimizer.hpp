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

#include "cropid/model/autodiff.hpp"

namespace cropid::model {

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const ad::ParameterSet& params, AdamOptions options = {});

  /// One bias-corrected update. Throws Error(NonFiniteGradient) before touching any parameter.
  void step(ad::ParameterSet& params, const ad::Gradients& grads);

  long steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  ad::Gradients m_;
  ad::Gradients v_;
  long t_ = 0;
};

}  // namespace cropid::model
