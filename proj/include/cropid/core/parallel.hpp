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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace cropid {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent, order-free RNG streams.
std::uint64_t mix64(std::uint64_t x);

/// Seed for the item `a` (and optional sub-item `b`) of a stream rooted at `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Uniform draw in [0, 1) that depends only on the key, not on any generator state.
double hash_uniform(std::uint64_t key);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is processed exactly once;
/// callers write results into pre-sized slots so the output never depends on scheduling.
/// If any call throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace cropid
