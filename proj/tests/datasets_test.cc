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

#include "pmfl/datasets.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "pmfl/common.h"
#include "pmfl/config.h"
#include "pmfl/metrics.h"
#include "pmfl/nn.h"
#include "pmfl/random.h"

namespace pmfl {
namespace {

TEST(Synthetic, ExactClassCounts) {
  DatasetSpec spec;
  spec.samples_per_class = 50;
  spec.test_fraction = 0.2;
  const auto split = synth_dataset(spec);
  for (auto c : split.train.class_counts()) EXPECT_EQ(c, 40u);
  for (auto c : split.test.class_counts()) EXPECT_EQ(c, 10u);
  EXPECT_EQ(split.train.input_dim, spec.input_dim);
}

TEST(Synthetic, SeedDeterminism) {
  DatasetSpec spec;
  spec.samples_per_class = 20;
  EXPECT_EQ(export_csv(synth_dataset(spec).train), export_csv(synth_dataset(spec).train));
  DatasetSpec other = spec;
  other.seed = spec.seed + 1;
  EXPECT_NE(export_csv(synth_dataset(spec).train), export_csv(synth_dataset(other).train));
}

TEST(Synthetic, ZeroNoiseIsLearnedPerfectly) {
  DatasetSpec spec;
  spec.noise = 0.0;
  spec.num_classes = 4;
  spec.input_dim = 4;
  spec.samples_per_class = 20;
  const auto split = synth_dataset(spec);
  Rng rng(1);
  ModelParams w = ModelParams::glorot_uniform(ModelShape(4, {16}, {8}, {4}), rng);
  for (int step = 0; step < 600; ++step) {
    w = sgd_step(w, cross_entropy_and_grad(w, split.train), 0.5);
  }
  EXPECT_EQ(evaluate(w, split.train).accuracy, 1.0);
  EXPECT_EQ(evaluate(w, split.test).accuracy, 1.0);
}

TEST(Csv, ThreeRowFixture) {
  const auto d = parse_csv("# x0,x1,label\n0.5,1,2\n-1,2e-3,0\n3,4,1\n");
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.input_dim, 2u);
  EXPECT_EQ(d.num_classes, 3u);
  EXPECT_EQ(d.labels, (std::vector<int>{2, 0, 1}));
  EXPECT_EQ(d.row(1)[1], 2e-3);
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse_csv(""), ValidationError);
  EXPECT_THROW(parse_csv("1,2,x\n"), ValidationError);
  EXPECT_THROW(parse_csv("1,2,0\n1,0\n"), ValidationError);
  EXPECT_THROW(parse_csv("1,2,0.5\n"), ValidationError);
  EXPECT_THROW(parse_csv("1,2,3\n", CsvSchema{2, false}), ValidationError);
  try {
    parse_csv("1,2,0\n1,oops,1\n");
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Csv, FileRoundTrip) {
  DatasetSpec spec;
  spec.samples_per_class = 5;
  const auto original = synth_dataset(spec).train;
  const char* base = std::getenv("PMFL_TEST_TMP");
  const auto dir = std::filesystem::path(base ? base : "/tmp") / "datasets_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "train.csv").string();
  std::ofstream(path) << export_csv(original);
  const auto back = ingest_csv(path, CsvSchema{original.num_classes, false});
  EXPECT_EQ(back.features, original.features);
  EXPECT_EQ(back.labels, original.labels);
  EXPECT_THROW(ingest_csv((dir / "missing.csv").string()), ValidationError);
}

TEST(LoadDataset, CsvSourceSplitsDeterministically) {
  DatasetSpec spec;
  spec.samples_per_class = 10;
  const auto all = synth_dataset(spec).train;
  const char* base = std::getenv("PMFL_TEST_TMP");
  const auto dir = std::filesystem::path(base ? base : "/tmp") / "datasets_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "all.csv").string();
  std::ofstream(path) << export_csv(all);
  DatasetSpec csv;
  csv.source = DatasetSource::kCsvFile;
  csv.path = path;
  csv.num_classes = spec.num_classes;
  csv.input_dim = spec.input_dim;
  const auto a = load_dataset(csv);
  const auto b = load_dataset(csv);
  EXPECT_EQ(a.train.size() + a.test.size(), all.size());
  EXPECT_EQ(a.test.labels, b.test.labels);
}

}  // namespace
}  // namespace pmfl
