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

#include "pmfl/contrastive.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "pmfl/common.h"

namespace pmfl {
namespace {

std::atomic<bool> zero_norm_warned{false};

void warn_zero_norm() {
  if (!zero_norm_warned.exchange(true)) {
    spdlog::warn("cosine similarity of a zero-norm vector; using 0 (further occurrences logged at debug level)");
  } else {
    spdlog::debug("cosine similarity of a zero-norm vector; using 0");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Adds scale * dSim(z, v)/dz into out.
void add_similarity_grad(std::span<const double> z, std::span<const double> v,
                         double scale, std::span<double> out) {
  const double zz = dot(z, z);
  const double vv = dot(v, v);
  if (zz == 0.0 || vv == 0.0) return;
  const double norm_prod = std::sqrt(zz * vv);
  const double sim = dot(z, v) / norm_prod;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] += scale * (v[i] / norm_prod - sim * z[i] / zz);
  }
}

struct Term {
  const Vector* vec;
  double logit;  // Sim / tau
  bool positive;
};

std::vector<Term> collect_terms(std::span<const double> current,
                                const ContrastiveContext& ctx) {
  if (!(ctx.tau > 0.0)) throw ValidationError("temperature must be positive");
  std::vector<Term> terms;
  terms.reserve(1 + ctx.positives.size() + ctx.negatives.size());
  terms.push_back({&ctx.global_rep, cosine_similarity(current, ctx.global_rep) / ctx.tau, true});
  for (const auto& v : ctx.positives) {
    terms.push_back({&v, cosine_similarity(current, v) / ctx.tau, true});
  }
  for (const auto& v : ctx.negatives) {
    terms.push_back({&v, cosine_similarity(current, v) / ctx.tau, false});
  }
  return terms;
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine similarity of vectors with lengths " +
                     std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const double aa = dot(a, a);
  const double bb = dot(b, b);
  if (aa == 0.0 || bb == 0.0) {
    warn_zero_norm();
    return 0.0;
  }
  const double sim = dot(a, b) / std::sqrt(aa * bb);
  return std::clamp(sim, -1.0, 1.0);
}

void LocalBuffer::push(ModelParams snapshot) {
  if (capacity_ == 0) return;
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(snapshot));
}

SamplePartition partition_samples(std::span<const double> current,
                                  std::span<const Vector> historical, double mu) {
  if (!std::isfinite(mu)) throw ValidationError("similarity threshold must be finite");
  SamplePartition out;
  for (const auto& h : historical) {
    if (cosine_similarity(current, h) >= mu) {
      out.positives.push_back(h);
    } else {
      out.negatives.push_back(h);
    }
  }
  return out;
}

double contrastive_loss(std::span<const double> current, const ContrastiveContext& ctx) {
  const std::vector<Term> terms = collect_terms(current, ctx);
  double m = terms.front().logit;
  for (const auto& t : terms) m = std::max(m, t.logit);
  double pos = 0.0;
  double neg = 0.0;
  for (const auto& t : terms) (t.positive ? pos : neg) += std::exp(t.logit - m);
  return std::log(pos + neg) - std::log(pos);
}

double contrastive_loss_and_grad(std::span<const double> current,
                                 const ContrastiveContext& ctx,
                                 std::span<double> dcurrent) {
  if (dcurrent.size() != current.size()) {
    throw ShapeError("contrastive gradient buffer has the wrong length");
  }
  const std::vector<Term> terms = collect_terms(current, ctx);
  double m = terms.front().logit;
  for (const auto& t : terms) m = std::max(m, t.logit);
  std::vector<double> e(terms.size());
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    e[i] = std::exp(terms[i].logit - m);
    (terms[i].positive ? pos : neg) += e[i];
  }
  // dL/ds_i = e_i/(pos+neg) - [positive] e_i/pos, and ds_i/dz = dSim/dz / tau.
  for (std::size_t i = 0; i < terms.size(); ++i) {
    double coeff = e[i] / (pos + neg);
    if (terms[i].positive) coeff -= e[i] / pos;
    if (coeff != 0.0) add_similarity_grad(current, *terms[i].vec, coeff / ctx.tau, dcurrent);
  }
  return std::log(pos + neg) - std::log(pos);
}

const ModelParams* mu_reference(const LocalBuffer& buffer) {
  return buffer.empty() ? nullptr : &buffer.newest();
}

double compute_mu(const ModelParams* reference, const ModelParams& global_params,
                  std::span<const double> x) {
  if (reference == nullptr || reference == &global_params) return 1.0;
  const Vector ref = forward_representation(*reference, x);
  const Vector glob = forward_representation(global_params, x);
  return cosine_similarity(ref, glob);
}

Gradient combined_loss_and_grad(const ModelParams& params, const Minibatch& batch,
                                const ModelParams& global_params,
                                const LocalBuffer& buffer,
                                const ContrastiveSettings& settings,
                                const MuRule& mu_rule) {
  if (settings.lambda == 0.0) return cross_entropy_and_grad(params, batch);
  if (!(params.shape() == global_params.shape())) {
    throw ShapeError("global model shape differs from the local model");
  }

  const RepresentationTerm term = [&](std::size_t s, std::span<const double> z,
                                      std::span<double> drep) {
    const auto x = batch.row(s);
    ContrastiveContext ctx;
    ctx.tau = settings.tau;
    ctx.lambda = settings.lambda;
    ctx.global_rep = forward_representation(global_params, x);
    ctx.mu = mu_rule.kind == MuRule::Kind::kFixed
                 ? mu_rule.fixed
                 : compute_mu(mu_rule.reference, global_params, x);
    std::vector<Vector> historical;
    historical.reserve(buffer.size());
    for (const auto& snapshot : buffer.entries()) {
      historical.push_back(forward_representation(snapshot, x));
    }
    SamplePartition split = partition_samples(z, historical, ctx.mu);
    ctx.positives = std::move(split.positives);
    ctx.negatives = std::move(split.negatives);

    std::vector<double> dz(z.size(), 0.0);
    const double loss = contrastive_loss_and_grad(z, ctx, dz);
    for (std::size_t i = 0; i < dz.size(); ++i) drep[i] += settings.lambda * dz[i];
    return settings.lambda * loss;
  };
  return batch_loss_and_grad(params, batch, &term);
}

}  // namespace pmfl
