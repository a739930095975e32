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

#ifndef PMFL_PARTICIPATION_H_
#define PMFL_PARTICIPATION_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pmfl/random.h"

namespace pmfl {

enum class Pattern { kBernoulli, kMarkovian, kCyclic };

Pattern parse_pattern(std::string_view name);
std::string_view pattern_name(Pattern p);

inline constexpr double kDefaultP01 = 0.05;
inline constexpr int kDefaultCycleLength = 100;

// P(A = 1) = p_k, independently every round.
bool bernoulli_indicator(double p_k, Rng& rng);

// One step of the two-state chain with p(0->1) = p01 and
// p(1->0) = (1 - p_k) * p01.
bool markov_indicator(bool state, double p_k, double p01, Rng& rng);

// Long-run participation probability of the chain above: 1 / (2 - p_k).
double markov_stationary(double p_k, double p01);

// 1 iff (round - offset) mod cycle < p_k * cycle, with the modulo taken in
// [0, cycle).
bool cyclic_indicator(double p_k, std::int64_t round, int cycle, int offset);

struct PatternParams {
  Pattern pattern = Pattern::kBernoulli;
  double p01 = kDefaultP01;
  int cycle_length = kDefaultCycleLength;
};

// Per-node participation generator. The RNG stream is keyed by
// (seed, node, pattern) so traces of existing nodes never depend on how
// many other nodes exist.
class ParticipationSchedule {
 public:
  ParticipationSchedule(double p_k, const PatternParams& params, std::uint64_t seed,
                        std::size_t node);

  // Indicator for the next round (rounds are consumed in order from 0).
  bool next();

  double frequency() const { return p_k_; }
  int offset() const { return offset_; }
  const PatternParams& params() const { return params_; }

 private:
  double p_k_;
  PatternParams params_;
  Rng rng_;
  std::int64_t round_ = 0;
  bool state_ = false;
  int offset_ = 0;
};

// rounds x nodes participation matrix, trace[t][k].
using ParticipationTrace = std::vector<std::vector<std::uint8_t>>;

ParticipationTrace generate_trace(const std::vector<double>& frequencies,
                                  const PatternParams& params, std::uint64_t seed,
                                  std::size_t rounds);

// "round,node_0,...,node_{K-1}" followed by one 0/1 row per round.
std::string trace_csv(const ParticipationTrace& trace);

}  // namespace pmfl

#endif  // PMFL_PARTICIPATION_H_
