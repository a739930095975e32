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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "oracles.h"
#include "pmfl/client.h"
#include "pmfl/common.h"
#include "pmfl/config.h"
#include "pmfl/contrastive.h"
#include "pmfl/experiment.h"
#include "pmfl/participation.h"
#include "pmfl/random.h"
#include "pmfl/server.h"

namespace fs = std::filesystem;
using namespace pmfl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

fs::path work_dir() {
  const char* base = std::getenv("PMFL_TEST_TMP");
  fs::path dir = fs::path(base ? base : fs::temp_directory_path().string()) / "acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelParams normal_params(const ModelShape& shape, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 0.8);
  ModelParams p = ModelParams::zeros(shape);
  for (double& v : p.flat()) v = normal(rng);
  return p;
}

Minibatch normal_batch(std::size_t dim, std::size_t classes, std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Minibatch b{dim, classes, {}, {}};
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = normal(rng);
    b.append(x, static_cast<int>(rng() % classes));
  }
  return b;
}

// 1. Analytic gradients against central differences. Draws are redrawn
// when the stencil straddles a ReLU kink or a positive/negative reassignment,
// where the loss has no derivative.
Outcome gradient_correctness() {
  const auto start = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  int valid[2] = {0, 0};
  int skipped = 0;
  const int wanted = 60;  // per kind
  for (int draw = 0; draw < 1000 && (valid[0] < wanted || valid[1] < wanted); ++draw) {
    const bool with_term = draw % 2 == 1;
    const std::size_t in = 2 + rng() % 3;
    const std::size_t hidden = 2 + rng() % 4;
    const std::size_t rep = 2 + rng() % 3;
    const std::size_t classes = 2 + rng() % 3;
    const ModelShape shape(in, {hidden}, {rep}, {classes});
    const ModelParams params = normal_params(shape, rng);
    const Minibatch batch = normal_batch(in, classes, 2 + rng() % 5, rng);
    std::function<double(const ModelParams&)> loss;
    Gradient grad;
    if (with_term) {
      const ModelParams global = normal_params(shape, rng);
      LocalBuffer buffer(2);
      buffer.push(normal_params(shape, rng));
      buffer.push(normal_params(shape, rng));
      const ModelParams reference = buffer.newest();
      const ContrastiveSettings settings{0.2 + uniform01(rng), 0.1 + uniform01(rng)};
      grad = combined_loss_and_grad(params, batch, global, buffer, settings,
                                    MuRule::from_reference(&reference));
      loss = [=](const ModelParams& q) {
        return combined_loss_and_grad(q, batch, global, buffer, settings,
                                      MuRule::from_reference(&reference))
            .loss;
      };
    } else {
      grad = cross_entropy_and_grad(params, batch);
      loss = [&](const ModelParams& q) { return cross_entropy_and_grad(q, batch).loss; };
    }
    if (valid[with_term] >= wanted) continue;
    const auto report =
        oracle::fd_check(loss, params, grad.values.flat(), Tolerances::kFiniteDiffStep);
    if (!report.smooth) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, report.max_rel_error);
    ++valid[with_term];
  }
  const double elapsed = seconds_since(start);
  const bool enough = valid[0] + valid[1] >= 100 && valid[0] > 0 && valid[1] > 0;
  return {enough && worst < Tolerances::kGradientRelError && elapsed < 60.0,
          fmt("%d cases (%d with the contrastive term, N=2), max rel error %.2e, %d "
              "non-differentiable draws redrawn, %.1f s",
              valid[0] + valid[1], valid[1], worst, skipped, elapsed)};
}

// 2. Incremental weights against the interval-list oracle.
Outcome weight_oracle() {
  const auto start = Clock::now();
  Rng rng(77);
  const std::int64_t cutoffs[] = {2, 5, 50, kNoCutoff};
  double worst = 0.0;
  const int traces = 1000;
  std::vector<std::uint8_t> trace(10000);
  for (int i = 0; i < traces; ++i) {
    const double p = uniform01(rng);
    for (auto& a : trace) a = uniform01(rng) < p ? 1 : 0;
    AggregatorConfig cfg;
    cfg.cutoff = cutoffs[i % 4];
    cfg.history = 0;
    AggregatorState state(ModelParams::zeros(ModelShape(1, {1}, {1}, {1})), 1, cfg);
    std::vector<std::uint8_t> ind(1);
    for (auto a : trace) {
      ind[0] = a;
      update_weights(state, ind);
    }
    worst = std::max(worst, std::abs(state.nodes[0].weight -
                                     oracle::interval_mean(trace, cfg.cutoff)));
  }
  const double elapsed = seconds_since(start);
  return {worst <= Tolerances::kWeightOracle && elapsed < 60.0,
          fmt("%d traces of 10^4 rounds, C in {2,5,50,inf}, max abs diff %.2e, %.1f s", traces,
              worst, elapsed)};
}

// 3. x_k times the empirical frequency is close to 1.
Outcome inverse_frequency() {
  const std::size_t nodes = 200;
  const std::size_t rounds = 10000;
  std::vector<double> freqs(nodes);
  Rng rng(5);
  for (auto& p : freqs) p = 0.02 + 0.98 * uniform01(rng);
  const auto trace = generate_trace(freqs, {Pattern::kBernoulli}, 11, rounds);
  AggregatorConfig cfg;
  cfg.cutoff = kNoCutoff;
  cfg.history = 0;
  AggregatorState state(ModelParams::zeros(ModelShape(1, {1}, {1}, {1})), nodes, cfg);
  std::vector<double> count(nodes, 0.0);
  for (const auto& row : trace) {
    update_weights(state, row);
    for (std::size_t k = 0; k < nodes; ++k) count[k] += row[k];
  }
  double lo = 1e9;
  double hi = -1e9;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < nodes; ++k) {
    if (freqs[k] < 0.05) continue;
    const double product = state.nodes[k].weight * count[k] / static_cast<double>(rounds);
    lo = std::min(lo, product);
    hi = std::max(hi, product);
    ++checked;
  }
  return {lo >= 0.95 && hi <= 1.05,
          fmt("%zu nodes with p_k >= 0.05, x_k * freq in [%.4f, %.4f]", checked, lo, hi)};
}

// 4. Contrastive identities.
Outcome contrastive_identities() {
  ContrastiveContext empty_neg;
  empty_neg.global_rep = {0.3, -0.2, 1.0};
  empty_neg.positives = {{1.0, 2.0, 0.5}};
  std::vector<double> z{0.4, 0.1, -0.9};
  std::vector<double> dz(3, 0.0);
  const bool zero = contrastive_loss(z, empty_neg) == 0.0 &&
                    contrastive_loss_and_grad(z, empty_neg, dz) == 0.0 &&
                    dz == std::vector<double>(3, 0.0);

  // lambda = 0: local training equals plain SGD bit for bit.
  Rng rng(9);
  const ModelShape shape(3, {5}, {4}, {3});
  const ModelParams global = normal_params(shape, rng);
  const Dataset shard = normal_batch(3, 3, 25, rng);
  LocalTrainConfig cfg;
  cfg.local_iterations = 7;
  cfg.batch_size = 4;
  cfg.lambda = 0.0;
  NodeState node(3, shard, 5, 17);
  node.buffer.push(normal_params(shape, rng));
  const auto delta = local_train(node, global, cfg, 4);
  Rng order_rng = make_rng(17, streams::kTraining, 3, 4);
  std::vector<std::size_t> order(shard.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(std::span<std::size_t>(order), order_rng);
  std::size_t cursor = 0;
  ModelParams w = global;
  for (int e = 0; e < cfg.local_iterations; ++e) {
    if (cursor + cfg.batch_size > shard.size()) {
      shuffle(std::span<std::size_t>(order), order_rng);
      cursor = 0;
    }
    const auto batch =
        shard.subset(std::span<const std::size_t>(order).subspan(cursor, cfg.batch_size));
    cursor += cfg.batch_size;
    w = sgd_step(w, cross_entropy_and_grad(w, batch), cfg.eta_l);
  }
  const bool identical = delta.has_value() && *delta == param_delta(w, global);

  ContrastiveContext fixture;
  fixture.tau = 1.0;
  fixture.global_rep = {1, 0};
  fixture.positives = {{1, 0}};
  fixture.negatives = {{-1, 0}};
  const double e = std::exp(1.0);
  const double expected = -std::log(2 * e / (2 * e + std::exp(-1.0)));
  const double got = contrastive_loss(std::vector<double>{1, 0}, fixture);
  const bool fixture_ok = std::abs(got - expected) < 1e-6;
  return {zero && identical && fixture_ok,
          fmt("empty negatives -> 0: %s; lambda=0 bit-identical: %s; fixture %.6f vs %.6f",
              zero ? "yes" : "no", identical ? "yes" : "no", got, expected)};
}

// 5. Participation statistics.
Outcome participation_statistics() {
  const std::size_t n = 100000;
  auto frequency = [&](double p, const PatternParams& params, std::uint64_t seed) {
    ParticipationSchedule s(p, params, seed, 0);
    double hits = 0.0;
    for (std::size_t t = 0; t < n; ++t) hits += s.next() ? 1.0 : 0.0;
    return hits / static_cast<double>(n);
  };
  bool ok = true;
  double worst_bern = 0.0;
  for (double p : {0.05, 0.1, 0.5, 0.9}) {
    const double z = std::abs(frequency(p, {Pattern::kBernoulli}, 3) - p) /
                     std::sqrt(p * (1 - p) / static_cast<double>(n));
    worst_bern = std::max(worst_bern, z);
  }
  ok = ok && worst_bern < 3.0;

  bool cyclic_exact = true;
  for (double p : {0.05, 0.1, 0.37, 1.0}) {
    ParticipationSchedule s(p, {Pattern::kCyclic, kDefaultP01, 100}, 4, 2);
    const auto expect = static_cast<int>(std::ceil(p * 100 - 1e-12));
    for (int cycle = 0; cycle < 50; ++cycle) {
      int count = 0;
      for (int t = 0; t < 100; ++t) count += s.next() ? 1 : 0;
      cyclic_exact = cyclic_exact && count == expect;
    }
  }
  ok = ok && cyclic_exact;

  double worst_markov = 0.0;
  const double p01 = kDefaultP01;
  for (double p : {0.05, 0.1, 0.5}) {
    const double pi = 1.0 / (2.0 - p);
    const double rho = 1.0 - p01 - (1.0 - p) * p01;
    const double sigma = std::sqrt(pi * (1 - pi) / static_cast<double>(n) * (1 + rho) / (1 - rho));
    const double z = std::abs(frequency(p, {Pattern::kMarkovian, p01}, 5) - pi) / sigma;
    worst_markov = std::max(worst_markov, z);
  }
  ok = ok && worst_markov < 3.0;
  return {ok, fmt("Bernoulli max |z| %.2f; cyclic per-cycle counts exact: %s; Markov max |z| "
                  "%.2f (sigma includes chain autocorrelation)",
                  worst_bern, cyclic_exact ? "yes" : "no", worst_markov)};
}

// 6. psi schedule.
Outcome psi_shape() {
  bool ok = true;
  for (std::int64_t T : {2, 3, 10, 400, 10000}) {
    ok = ok && psi_schedule(0, T) == 0.5 && psi_schedule(T - 1, T) == 0.0;
    for (std::int64_t t = 1; t < T; ++t) ok = ok && psi_schedule(t, T) < psi_schedule(t - 1, T);
  }
  return {ok, "psi(0)=0.5, psi(T-1)=0, strictly decreasing for T in {2,3,10,400,10000}"};
}

struct AblationRuns {
  std::vector<double> pmfl_acc, wo_awc_acc, wo_mct_acc;
  std::vector<double> pmfl_dev, wo_mct_dev;
  double seconds = 0.0;
};

AblationRuns run_ablation() {
  AblationRuns out;
  const auto start = Clock::now();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig cfg = desk_profile();
    cfg.seed = seed;
    cfg.variant = Variant::kPmfl;
    const auto p = run_experiment(cfg).summary;
    cfg.variant = Variant::kWoAwc;
    const auto a = run_experiment(cfg).summary;
    cfg.variant = Variant::kWoMct;
    const auto m = run_experiment(cfg).summary;
    out.pmfl_acc.push_back(p["top5_test_accuracy"]);
    out.wo_awc_acc.push_back(a["top5_test_accuracy"]);
    out.wo_mct_acc.push_back(m["top5_test_accuracy"]);
    out.pmfl_dev.push_back(p["mean_deviation_last_quarter"]);
    out.wo_mct_dev.push_back(m["mean_deviation_last_quarter"]);
    std::printf("  seed %2llu: top5 acc pmfl %.4f wo_awc %.4f wo_mct %.4f | last-quarter dev "
                "pmfl %.4f wo_mct %.4f\n",
                static_cast<unsigned long long>(seed), out.pmfl_acc.back(),
                out.wo_awc_acc.back(), out.wo_mct_acc.back(), out.pmfl_dev.back(),
                out.wo_mct_dev.back());
    std::fflush(stdout);
  }
  out.seconds = seconds_since(start);
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// 7. Ablation ordering.
Outcome ablation_ordering(const AblationRuns& r, double suite_seconds) {
  int beats_awc = 0;
  for (std::size_t i = 0; i < r.pmfl_acc.size(); ++i) beats_awc += r.pmfl_acc[i] > r.wo_awc_acc[i];
  const double pm = mean(r.pmfl_acc);
  const double mm = mean(r.wo_mct_acc);
  return {beats_awc >= 8 && pm > mm && suite_seconds < 1800.0,
          fmt("PMFL > w/o AWC in %d/10 seeds; mean top-5 acc PMFL %.4f vs w/o MCT %.4f; "
              "suite %.0f s",
              beats_awc, pm, mm, suite_seconds)};
}

// 8. Deviation reduction.
Outcome deviation_reduction(const AblationRuns& r) {
  int lower = 0;
  for (std::size_t i = 0; i < r.pmfl_dev.size(); ++i) lower += r.pmfl_dev[i] < r.wo_mct_dev[i];
  return {lower >= 8, fmt("PMFL last-quarter deviation below w/o MCT in %d/10 seeds (mean %.4f "
                          "vs %.4f)",
                          lower, mean(r.pmfl_dev), mean(r.wo_mct_dev))};
}

// 9. Smoothing effect.
Outcome smoothing_effect() {
  int lower = 0;
  std::vector<double> with_h, without_h;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig cfg = desk_profile();
    cfg.seed = seed;
    cfg.target_frequency = 0.05;
    cfg.eval_every = 1;
    cfg.eval_train = false;
    cfg.global_buffer = 3;
    const double h3 = run_experiment(cfg).summary["test_accuracy_std_last_100"];
    cfg.global_buffer = 0;
    const double h0 = run_experiment(cfg).summary["test_accuracy_std_last_100"];
    with_h.push_back(h3);
    without_h.push_back(h0);
    lower += h3 < h0;
    std::printf("  seed %2llu: last-100 test accuracy std H=3 %.4f H=0 %.4f\n",
                static_cast<unsigned long long>(seed), h3, h0);
    std::fflush(stdout);
  }
  return {lower >= 8, fmt("H=3 std below H=0 in %d/10 seeds (mean %.4f vs %.4f)", lower,
                          mean(with_h), mean(without_h))};
}

const char* const kCompared[] = {"metrics.csv", "weights.csv", "deviation.csv", "model.bin"};

// 10. Reduction to uniform averaging.
Outcome reduction(const fs::path& dir) {
  ExperimentConfig cfg = desk_profile();
  cfg.rounds = 60;
  cfg.full_participation = true;
  cfg.lambda = 0.0;
  cfg.local_buffer = 0;
  cfg.global_buffer = 1;
  cfg.cutoff = kNoCutoff;
  cfg.aggregation_mode = AggregationMode::kCorrected;
  run_experiment(cfg, {(dir / "reduce_pmfl").string(), false});
  cfg.variant = Variant::kUniformAverage;
  run_experiment(cfg, {(dir / "reduce_fedavg").string(), false});
  bool same = true;
  for (const char* f : kCompared) {
    same = same && slurp(dir / "reduce_pmfl" / f) == slurp(dir / "reduce_fedavg" / f);
  }
  return {same, fmt("60 full-participation rounds, metrics/weights/deviation/model identical: %s",
                    same ? "yes" : "no")};
}

// 11. Reproducibility across reruns and worker counts.
Outcome reproducibility(const fs::path& dir) {
  ExperimentConfig cfg = desk_profile();
  cfg.rounds = 80;
  cfg.target_frequency = 0.3;
  cfg.seed = 4;
  run_experiment(cfg, {(dir / "repro_a").string(), false});
  run_experiment(cfg, {(dir / "repro_b").string(), false});
  cfg.workers = 4;
  run_experiment(cfg, {(dir / "repro_c").string(), false});
  const char* files[] = {"metrics.csv", "weights.csv", "deviation.csv", "cdf.csv",
                         "participation.csv", "summary.json", "model.bin"};
  bool same = true;
  for (const char* f : files) {
    const auto a = slurp(dir / "repro_a" / f);
    same = same && !a.empty() && a == slurp(dir / "repro_b" / f) &&
           a == slurp(dir / "repro_c" / f);
  }
  return {same, fmt("rerun and 4-worker run byte-identical: %s", same ? "yes" : "no")};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const auto suite_start = Clock::now();
  const fs::path dir = work_dir();
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("[%s] criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  report(1, "gradient correctness", gradient_correctness());
  report(2, "weight-recursion oracle", weight_oracle());
  report(3, "inverse-frequency property", inverse_frequency());
  report(4, "contrastive identities", contrastive_identities());
  report(5, "participation statistics", participation_statistics());
  report(6, "psi schedule", psi_shape());
  std::printf("  running ablation: 10 seeds x {pmfl, wo_awc, wo_mct}\n");
  const AblationRuns ablation = run_ablation();
  std::printf("  running smoothing comparison: 10 seeds x {H=3, H=0}\n");
  const Outcome smoothing = smoothing_effect();
  report(7, "ablation ordering", ablation_ordering(ablation, seconds_since(suite_start)));
  report(8, "deviation reduction", deviation_reduction(ablation));
  report(9, "smoothing effect", smoothing);
  report(10, "reduction to uniform averaging", reduction(dir));
  report(11, "reproducibility", reproducibility(dir));
  std::printf("%d of 11 criteria passed (%.0f s)\n", 11 - failures, seconds_since(suite_start));
  return failures == 0 ? 0 : 1;
}
