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

#include "pmfl/server.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "pmfl/common.h"
#include "pmfl/random.h"

namespace pmfl {
namespace {

const ModelShape kShape(1, {1}, {1}, {1});  // 6 parameters

ModelParams filled(double v) {
  ModelParams p = ModelParams::zeros(kShape);
  for (double& x : p.flat()) x = v;
  return p;
}

std::vector<double> vec(double v) { return std::vector<double>(kShape.num_params(), v); }

AggregatorState make_state(std::size_t nodes, AggregatorConfig cfg, double init = 0.0) {
  return AggregatorState(filled(init), nodes, cfg);
}

TEST(Weights, EveryRoundParticipantStaysAtOne) {
  auto s = make_state(1, {});
  const std::vector<std::uint8_t> on{1};
  for (int t = 0; t < 200; ++t) EXPECT_EQ(update_weights(s, on)[0], 1.0);
}

TEST(Weights, HandTraceThreeThenFour) {
  AggregatorConfig cfg;
  cfg.cutoff = 50;
  auto s = make_state(1, cfg);
  const std::vector<std::uint8_t> off{0};
  const std::vector<std::uint8_t> on{1};
  update_weights(s, off);
  update_weights(s, off);
  EXPECT_EQ(update_weights(s, on)[0], 3.0);
  for (int i = 0; i < 4; ++i) update_weights(s, off);
  EXPECT_EQ(update_weights(s, on)[0], 4.0);
  EXPECT_EQ(s.nodes[0].events, 2);
}

TEST(Weights, NeverParticipatingHitsCutoff) {
  AggregatorConfig cfg;
  cfg.cutoff = 50;
  auto s = make_state(1, cfg);
  const std::vector<std::uint8_t> off{0};
  for (int t = 1; t <= 1000; ++t) {
    update_weights(s, off);
    EXPECT_LT(s.nodes[0].interval, 50);
    if (t == 50) EXPECT_EQ(s.nodes[0].weight, 50.0);
  }
  EXPECT_EQ(s.nodes[0].weight, 50.0);
  EXPECT_EQ(s.nodes[0].events, 20);
}

TEST(Weights, MatchesIntervalOracleOnRandomTraces) {
  Rng rng(123);
  for (std::int64_t cutoff : {std::int64_t{2}, std::int64_t{5}, std::int64_t{50}, kNoCutoff}) {
    for (int rep = 0; rep < 20; ++rep) {
      const double p = uniform01(rng);
      std::vector<std::uint8_t> trace(2000);
      for (auto& a : trace) a = uniform01(rng) < p ? 1 : 0;
      AggregatorConfig cfg;
      cfg.cutoff = cutoff;
      auto s = make_state(1, cfg);
      for (auto a : trace) update_weights(s, std::vector<std::uint8_t>{a});
      EXPECT_NEAR(s.nodes[0].weight, oracle::interval_mean(trace, cutoff),
                  Tolerances::kWeightOracle);
    }
  }
}

TEST(Weights, RejectsWrongIndicatorCount) {
  auto s = make_state(2, {});
  EXPECT_THROW(update_weights(s, std::vector<std::uint8_t>{1}), ShapeError);
}

TEST(Psi, EndpointsAndMonotone) {
  EXPECT_EQ(psi_schedule(0, 400), 0.5);
  EXPECT_EQ(psi_schedule(399, 400), 0.0);
  for (std::int64_t t = 1; t < 400; ++t) EXPECT_LT(psi_schedule(t, 400), psi_schedule(t - 1, 400));
  EXPECT_THROW(psi_schedule(0, 1), ConfigError);
}

TEST(Aggregate, CorrectedAndLiteralModes) {
  AggregatorConfig cfg;
  cfg.history = 0;
  cfg.eta_g = 0.5;
  auto corrected = make_state(4, cfg, 1.0);
  update_weights(corrected, std::vector<std::uint8_t>{1, 1, 0, 0});
  const auto& w = aggregate(corrected, {{0, vec(2.0)}, {1, vec(4.0)}});
  EXPECT_DOUBLE_EQ(w.flat()[0], 1.0 + 0.5 / 4.0 * (1.0 * 2.0 + 1.0 * 4.0));

  cfg.mode = AggregationMode::kPaperLiteral;
  auto literal = make_state(4, cfg, 1.0);
  update_weights(literal, std::vector<std::uint8_t>{1, 1, 0, 0});
  const auto& v = aggregate(literal, {{0, vec(2.0)}, {1, vec(4.0)}});
  EXPECT_DOUBLE_EQ(v.flat()[0], 1.0 - 0.5 * 6.0);
}

TEST(Aggregate, FixedPointWithZeroUpdates) {
  AggregatorConfig cfg;
  cfg.horizon = 10;
  auto s = make_state(2, cfg, 0.25);
  for (int t = 0; t < 5; ++t) {
    update_weights(s, std::vector<std::uint8_t>{0, 0});
    EXPECT_EQ(aggregate(s, {}), filled(0.25));
  }
  EXPECT_EQ(s.history.size(), 2u);
}

TEST(Aggregate, HistoricalTermWithEqualBufferedModels) {
  AggregatorConfig cfg;
  cfg.history = 3;
  cfg.horizon = 11;
  auto s = make_state(1, cfg, 0.0);
  s.history = {filled(2.0), filled(2.0)};
  s.round = 4;
  update_weights(s, std::vector<std::uint8_t>{1});
  const double psi = psi_schedule(4, 11);
  const auto& w = aggregate(s, {{0, vec(3.0)}});
  // candidate = 0 + 3 (K = 1, x = 1); historical mean = 2.
  EXPECT_DOUBLE_EQ(w.flat()[0], (1 - psi) * 3.0 + psi * 2.0);
  EXPECT_EQ(s.last_psi, psi);
}

TEST(Aggregate, WarmUpPassesCandidateThrough) {
  AggregatorConfig cfg;
  cfg.horizon = 5;
  auto s = make_state(1, cfg, 0.0);
  update_weights(s, std::vector<std::uint8_t>{1});
  EXPECT_EQ(aggregate(s, {{0, vec(1.0)}}), filled(1.0));
  EXPECT_EQ(s.history.size(), 1u);
}

TEST(Aggregate, PermutationInvariantAndZeroUpdateInert) {
  AggregatorConfig cfg;
  cfg.history = 0;
  auto a = make_state(3, cfg, 0.1);
  auto b = make_state(3, cfg, 0.1);
  const std::vector<std::uint8_t> ind{1, 1, 1};
  update_weights(a, ind);
  update_weights(b, ind);
  UpdateMap with_zero{{0, vec(0.3)}, {1, vec(-0.7)}, {2, vec(0.0)}};
  UpdateMap without{{1, vec(-0.7)}, {0, vec(0.3)}};
  EXPECT_EQ(aggregate(a, with_zero), aggregate(b, without));
}

TEST(Aggregate, RejectsWrongDimension) {
  auto s = make_state(1, {});
  EXPECT_THROW(aggregate(s, {{0, std::vector<double>(3, 0.0)}}), ShapeError);
}

TEST(Baselines, UniformAverageSingleParticipant) {
  AggregatorConfig cfg;
  cfg.eta_g = 0.7;
  auto s = make_state(5, cfg, 1.0);
  EXPECT_DOUBLE_EQ(baseline_aggregate(BaselineKind::kUniformAverage, s, {{3, vec(2.0)}})
                       .flat()[0],
                   1.0 + 0.7 * 2.0);
}

TEST(Baselines, CachedUpdateUsesLatestPerNode) {
  auto s = make_state(2, {}, 0.0);
  baseline_aggregate(BaselineKind::kCachedUpdate, s, {{0, vec(2.0)}});
  EXPECT_DOUBLE_EQ(s.global.flat()[0], 1.0);  // node 1 contributes zero
  baseline_aggregate(BaselineKind::kCachedUpdate, s, {{1, vec(4.0)}});
  EXPECT_DOUBLE_EQ(s.global.flat()[0], 1.0 + 3.0);
}

TEST(Baselines, CachedEqualsUniformUnderFullParticipation) {
  Rng rng(5);
  auto cached = make_state(3, {}, 0.0);
  auto uniform = make_state(3, {}, 0.0);
  for (int t = 0; t < 10; ++t) {
    UpdateMap u;
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> d(kShape.num_params());
      for (double& x : d) x = uniform01(rng) - 0.5;
      u[k] = d;
    }
    baseline_aggregate(BaselineKind::kCachedUpdate, cached, u);
    baseline_aggregate(BaselineKind::kUniformAverage, uniform, u);
    for (std::size_t i = 0; i < kShape.num_params(); ++i) {
      EXPECT_NEAR(cached.global.flat()[i], uniform.global.flat()[i], 1e-12);
    }
  }
}

TEST(Baselines, FedAvgReductionIsBitIdentical) {
  Rng rng(8);
  AggregatorConfig cfg;
  cfg.history = 1;
  cfg.cutoff = kNoCutoff;
  auto pmfl = make_state(4, cfg, 0.2);
  auto fedavg = make_state(4, cfg, 0.2);
  const std::vector<std::uint8_t> all{1, 1, 1, 1};
  for (int t = 0; t < 20; ++t) {
    UpdateMap u;
    for (std::size_t k = 0; k < 4; ++k) {
      std::vector<double> d(kShape.num_params());
      for (double& x : d) x = uniform01(rng) - 0.5;
      u[k] = d;
    }
    update_weights(pmfl, all);
    aggregate(pmfl, u);
    baseline_aggregate(BaselineKind::kUniformAverage, fedavg, u);
    EXPECT_EQ(pmfl.global, fedavg.global);
  }
}

TEST(Config, RejectsBadValues) {
  AggregatorConfig cfg;
  cfg.history = 3;
  cfg.horizon = 1;
  EXPECT_THROW(make_state(1, cfg), ConfigError);
  cfg.horizon = 10;
  cfg.cutoff = -3;
  EXPECT_THROW(make_state(1, cfg), ConfigError);
}

TEST(Modes, ParseNames) {
  EXPECT_EQ(parse_aggregation_mode("paper_literal"), AggregationMode::kPaperLiteral);
  EXPECT_EQ(parse_baseline("awc_only"), BaselineKind::kAwcOnly);
  EXPECT_THROW(parse_baseline("fedprox"), std::invalid_argument);
}

}  // namespace
}  // namespace pmfl
