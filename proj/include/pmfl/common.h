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

#ifndef PMFL_COMMON_H_
#define PMFL_COMMON_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmfl {

// Tensor dimensions disagree (layer shapes, vector lengths, flat sizes).
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data is malformed (label out of range, empty batch, bad CSV row).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Experiment configuration is invalid. `field` carries the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Numerical tolerances shared by the library and its tests.
struct Tolerances {
  static constexpr double kProbabilitySum = 1e-9;
  static constexpr double kGradientRelError = 1e-4;
  static constexpr double kFiniteDiffStep = 1e-5;
  static constexpr double kWeightOracle = 1e-9;
  static constexpr double kScaleInvariance = 1e-10;
  static constexpr double kSoftmaxSum = 1e-12;
};

// Lower bound on any participation frequency produced by the generators.
inline constexpr double kMinParticipationFrequency = 0.02;

}  // namespace pmfl

#endif  // PMFL_COMMON_H_
