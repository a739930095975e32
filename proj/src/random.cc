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

#include "pmfl/random.h"

#include <numeric>

namespace pmfl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; stream names are short literals.
std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = splitmix64(root);
  s = splitmix64(s ^ hash_name(stream));
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ (b + 0x632be59bd9b4e019ULL));
  return s;
}

std::vector<double> sample_dirichlet(double alpha, std::size_t dim, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(dim, 0.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (auto& v : out) v = gamma(rng);
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total > 0.0) {
      for (auto& v : out) v /= total;
      return out;
    }
  }
  // Every draw underflowed; fall back to a single random vertex.
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(dim))] = 1.0;
  return out;
}

}  // namespace pmfl
