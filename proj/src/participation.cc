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

#include "pmfl/participation.h"

#include <sstream>

#include "pmfl/common.h"

namespace pmfl {

Pattern parse_pattern(std::string_view name) {
  if (name == "bernoulli") return Pattern::kBernoulli;
  if (name == "markovian" || name == "markov") return Pattern::kMarkovian;
  if (name == "cyclic") return Pattern::kCyclic;
  throw ValidationError("unknown participation pattern '" + std::string(name) + "'");
}

std::string_view pattern_name(Pattern p) {
  switch (p) {
    case Pattern::kBernoulli:
      return "bernoulli";
    case Pattern::kMarkovian:
      return "markovian";
    case Pattern::kCyclic:
      return "cyclic";
  }
  return "unknown";
}

bool bernoulli_indicator(double p_k, Rng& rng) {
  if (p_k <= 0.0) return false;
  if (p_k >= 1.0) return true;
  return uniform01(rng) < p_k;
}

bool markov_indicator(bool state, double p_k, double p01, Rng& rng) {
  if (state) {
    const double p10 = (1.0 - p_k) * p01;
    return !(uniform01(rng) < p10);
  }
  return uniform01(rng) < p01;
}

double markov_stationary(double p_k, double p01) {
  const double p10 = (1.0 - p_k) * p01;
  return p01 / (p01 + p10);
}

bool cyclic_indicator(double p_k, std::int64_t round, int cycle, int offset) {
  if (cycle < 1) throw ValidationError("cycle length must be >= 1");
  std::int64_t phase = (round - offset) % cycle;
  if (phase < 0) phase += cycle;
  return static_cast<double>(phase) < p_k * static_cast<double>(cycle);
}

ParticipationSchedule::ParticipationSchedule(double p_k, const PatternParams& params,
                                             std::uint64_t seed, std::size_t node)
    : p_k_(p_k),
      params_(params),
      rng_(make_rng(seed, streams::kParticipation, node,
                    static_cast<std::uint64_t>(params.pattern))) {
  if (!(p_k >= 0.0 && p_k <= 1.0)) throw ValidationError("p_k must lie in [0, 1]");
  switch (params_.pattern) {
    case Pattern::kBernoulli:
      break;
    case Pattern::kMarkovian:
      if (!(params_.p01 > 0.0 && params_.p01 <= 1.0)) {
        throw ValidationError("p01 must lie in (0, 1]");
      }
      state_ = uniform01(rng_) < markov_stationary(p_k_, params_.p01);
      break;
    case Pattern::kCyclic:
      if (params_.cycle_length < 1) throw ValidationError("cycle length must be >= 1");
      offset_ = static_cast<int>(uniform01(rng_) * params_.cycle_length);
      if (offset_ >= params_.cycle_length) offset_ = params_.cycle_length - 1;
      break;
  }
}

bool ParticipationSchedule::next() {
  const std::int64_t t = round_++;
  switch (params_.pattern) {
    case Pattern::kBernoulli:
      return bernoulli_indicator(p_k_, rng_);
    case Pattern::kMarkovian: {
      // Round 0 reports the stationary initial state; later rounds step.
      if (t > 0) state_ = markov_indicator(state_, p_k_, params_.p01, rng_);
      return state_;
    }
    case Pattern::kCyclic:
      return cyclic_indicator(p_k_, t, params_.cycle_length, offset_);
  }
  return false;
}

ParticipationTrace generate_trace(const std::vector<double>& frequencies,
                                  const PatternParams& params, std::uint64_t seed,
                                  std::size_t rounds) {
  ParticipationTrace trace(rounds, std::vector<std::uint8_t>(frequencies.size(), 0));
  for (std::size_t k = 0; k < frequencies.size(); ++k) {
    ParticipationSchedule schedule(frequencies[k], params, seed, k);
    for (std::size_t t = 0; t < rounds; ++t) trace[t][k] = schedule.next() ? 1 : 0;
  }
  return trace;
}

std::string trace_csv(const ParticipationTrace& trace) {
  std::ostringstream os;
  const std::size_t nodes = trace.empty() ? 0 : trace.front().size();
  os << "round";
  for (std::size_t k = 0; k < nodes; ++k) os << ",node_" << k;
  os << '\n';
  for (std::size_t t = 0; t < trace.size(); ++t) {
    os << t;
    for (auto a : trace[t]) os << ',' << static_cast<int>(a);
    os << '\n';
  }
  return os.str();
}

}  // namespace pmfl
