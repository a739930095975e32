/*
 * Copyright 2026 The PMFL Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PMFL_RANDOM_H_
#define PMFL_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace pmfl {

using Rng = std::mt19937_64;

// Named RNG streams split off a single root seed. Each consumer gets its own
// stream so that enabling one feature never shifts another's randomness.
namespace streams {
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kDataset = "dataset";
inline constexpr std::string_view kPartition = "partition";
inline constexpr std::string_view kFrequencies = "frequencies";
inline constexpr std::string_view kParticipation = "participation";
inline constexpr std::string_view kTraining = "training";
}  // namespace streams

// Mixes (root, stream, a, b) into a 64-bit seed with splitmix64 finalizers.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(root, stream, a, b));
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Dirichlet(alpha, ..., alpha) sample of the given dimension. Redraws when
// every gamma variate underflows to zero (possible for tiny alpha).
std::vector<double> sample_dirichlet(double alpha, std::size_t dim, Rng& rng);

// Fisher-Yates shuffle driven by uniform01 so the permutation is
// reproducible across standard-library implementations.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(items[i - 1], items[j < i ? j : i - 1]);
  }
}

}  // namespace pmfl

#endif  // PMFL_RANDOM_H_
