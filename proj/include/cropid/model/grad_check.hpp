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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cropid/model/autodiff.hpp"

namespace cropid::model {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // parameter name and element of the largest error
};

/// Scalar-valued function of the parameters, built on the given graph.
using ScalarFn = std::function<ad::Var(ad::Graph&, const ad::ParameterSet&)>;

/// Compares reverse-mode gradients with central differences. Per element the relative error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6). With max_per_param > 0 only that many
/// seeded random elements of each parameter are probed.
GradCheckResult grad_check(const ScalarFn& f, ad::ParameterSet& params, double eps = 1e-4,
                           std::size_t max_per_param = 0, std::uint64_t seed = 0);

/// Named layer checks with randomly drawn shapes and values for the given seed.
const std::vector<std::string>& grad_check_modules();
GradCheckResult grad_check_module(const std::string& module, std::uint64_t seed, double eps = 1e-4);

}  // namespace cropid::model
