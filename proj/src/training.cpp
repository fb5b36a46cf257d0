// Copyright 2026 The uprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "uprobe/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "uprobe/errors.hpp"
#include "uprobe/parallel.hpp"

namespace uprobe {
namespace {

// Fixed so that gradient sums do not depend on the worker count.
constexpr std::size_t kGradientChunks = 8;

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::mt19937_64 g(seq);
  return g();
}

struct AdamState {
  Params m;
  Params v;
};

void AddInto(Params& acc, const Params& g) {
  std::vector<Matrix*> dst;
  VisitTensors(acc, [&dst](const std::string&, Matrix& m, bool) { dst.push_back(&m); });
  std::size_t i = 0;
  VisitTensors(g, [&](const std::string&, const Matrix& m, bool) { *dst[i++] += m; });
}

double GlobalNorm(const Params& g) {
  double sq = 0.0;
  VisitTensors(g, [&sq](const std::string&, const Matrix& m, bool) {
    sq += m.squaredNorm();
  });
  return std::sqrt(sq);
}

}  // namespace

void ValidateSchedule(const TrainSchedule& s) {
  auto check = [](bool ok, const std::string& m) {
    if (!ok) throw Error(ErrorKind::kConfig, m);
  };
  check(s.steps >= 0, "steps must be non-negative");
  check(s.batch_size > 0, "batch_size must be positive");
  check(s.learning_rate > 0.0, "learning_rate must be positive");
  check(s.warmup_fraction >= 0.0 && s.warmup_fraction < 1.0,
        "warmup_fraction must lie in [0,1)");
  check(s.weight_decay >= 0.0, "weight_decay must be non-negative");
  check(s.mask_prob > 0.0 && s.mask_prob <= 1.0,
        "mask_prob must lie in (0,1]");
  check(s.target_mask_prob >= 0.0 && s.target_mask_prob <= 1.0,
        "target_mask_prob must lie in [0,1]");
  check(s.attention_dropout >= 0.0 && s.attention_dropout < 1.0,
        "attention_dropout must lie in [0,1)");
  check(s.key_dropout >= 0.0 && s.key_dropout < 1.0,
        "key_dropout must lie in [0,1)");
  check(s.key_dropout_zero_fraction >= 0.0 && s.key_dropout_zero_fraction <= 1.0,
        "key_dropout_zero_fraction must lie in [0,1]");
}

MaskedExample MakeMaskedExample(const Vocabulary& vocab,
                                const AgreementInstance& inst,
                                double mask_prob, double target_mask_prob,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(mask_prob);
  std::bernoulli_distribution target_coin(target_mask_prob);
  MaskedExample ex;
  ex.input_ids = vocab.Encode(inst.tokens);
  const std::size_t T = ex.input_ids.size();
  std::vector<bool> masked(T, false);
  for (std::size_t t = 0; t < T; ++t) masked[t] = coin(rng);
  if (target_mask_prob > 0.0 && target_coin(rng)) masked[inst.target_index] = true;
  if (std::none_of(masked.begin(), masked.end(), [](bool b) { return b; })) {
    masked[std::uniform_int_distribution<std::size_t>(0, T - 1)(rng)] = true;
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (!masked[t]) continue;
    ex.positions.push_back(t);
    ex.labels.push_back(ex.input_ids[t]);
    ex.input_ids[t] = Vocabulary::kMaskId;
  }
  return ex;
}

double EvaluateMlmLoss(const Model& model, const Dataset& data,
                       double mask_prob, std::uint64_t seed) {
  if (data.empty()) return 0.0;
  std::vector<double> total(data.size(), 0.0);
  std::vector<double> count(data.size(), 0.0);
  ParallelFor(data.size(), [&](std::size_t i) {
    const MaskedExample ex = MakeMaskedExample(model.vocab(), data[i], mask_prob,
                                               0.0, MixSeed(seed, i));
    const double loss =
        LossAndGradient(model.config(), model.params(), ex, nullptr);
    total[i] = loss * static_cast<double>(ex.positions.size());
    count[i] = static_cast<double>(ex.positions.size());
  });
  return std::accumulate(total.begin(), total.end(), 0.0) /
         std::accumulate(count.begin(), count.end(), 0.0);
}

Model TrainMlm(const ModelConfig& config, const Vocabulary& vocab,
               const Dataset& train, const Dataset& dev,
               const TrainSchedule& schedule, TrainReport* report) {
  ValidateSchedule(schedule);
  if (train.empty()) throw Error(ErrorKind::kData, "training corpus is empty");
  Model model = Model::Initialize(config, vocab);
  const ModelConfig& cfg = model.config();
  for (const auto& inst : train) {
    if (static_cast<int>(inst.tokens.size()) > cfg.max_seq_len) {
      throw Error(ErrorKind::kData, "training sentence longer than max_seq_len");
    }
  }

  Params& params = model.mutable_params();
  AdamState adam{ZerosLike(params), ZerosLike(params)};
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;

  std::mt19937_64 order_rng(MixSeed(cfg.seed, 0x0badc0de));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), order_rng);
  std::size_t cursor = 0;

  const long warmup = static_cast<long>(schedule.warmup_fraction *
                                        static_cast<double>(schedule.steps));
  TrainReport local;
  double window_loss = 0.0;
  long window_n = 0;

  for (long step = 0; step < schedule.steps; ++step) {
    std::vector<std::size_t> batch(schedule.batch_size);
    for (auto& b : batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      b = order[cursor++];
    }

    std::vector<Params> chunk_grads(kGradientChunks);
    std::vector<double> chunk_loss(kGradientChunks, 0.0);
    ForEachChunk(batch.size(), kGradientChunks,
                 [&](std::size_t c, std::size_t begin, std::size_t end) {
                   chunk_grads[c] = ZerosLike(params);
                   for (std::size_t i = begin; i < end; ++i) {
                     const std::uint64_t ex_seed =
                         MixSeed(cfg.seed + 1, static_cast<std::uint64_t>(step) *
                                                   1000003u + i);
                     const MaskedExample ex = MakeMaskedExample(
                         vocab, train[batch[i]], schedule.mask_prob,
                         schedule.target_mask_prob, ex_seed);
                     std::mt19937_64 drop_rng(ex_seed ^ 0x9e3779b97f4a7c15ULL);
                     chunk_loss[c] += LossAndGradient(
                         cfg, params, ex, &chunk_grads[c],
                         1.0 / static_cast<double>(batch.size()), &drop_rng,
                         schedule.attention_dropout, schedule.key_dropout,
                         schedule.key_dropout_zero_fraction);
                   }
                 });
    Params grad = ZerosLike(params);
    double loss = 0.0;
    for (std::size_t c = 0; c < kGradientChunks; ++c) {
      if (chunk_grads[c].blocks.empty()) continue;  // empty chunk
      AddInto(grad, chunk_grads[c]);
      loss += chunk_loss[c];
    }
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) {
      throw TrainingError(step, "masked-LM loss is not finite");
    }

    const double norm = GlobalNorm(grad);
    const double clip =
        (schedule.grad_clip > 0.0 && norm > schedule.grad_clip)
            ? schedule.grad_clip / norm
            : 1.0;
    double lr = schedule.learning_rate;
    if (warmup > 0 && step < warmup) {
      lr *= static_cast<double>(step + 1) / static_cast<double>(warmup);
    } else {
      lr *= std::max(0.0, static_cast<double>(schedule.steps - step) /
                              static_cast<double>(schedule.steps - warmup));
    }
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step + 1));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step + 1));

    std::vector<Matrix*> gs, ms, vs;
    VisitTensors(grad, [&gs](const std::string&, Matrix& m, bool) { gs.push_back(&m); });
    VisitTensors(adam.m, [&ms](const std::string&, Matrix& m, bool) { ms.push_back(&m); });
    VisitTensors(adam.v, [&vs](const std::string&, Matrix& m, bool) { vs.push_back(&m); });
    std::size_t idx = 0;
    VisitTensors(params, [&](const std::string&, Matrix& w, bool decays) {
      Matrix& g = *gs[idx];
      Matrix& m = *ms[idx];
      Matrix& v = *vs[idx];
      ++idx;
      g *= clip;
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
      if (decays) w *= (1.0 - lr * schedule.weight_decay);
      w.array() -= lr * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + kAdamEps);
    });

    window_loss += loss;
    ++window_n;
    if ((step + 1) % schedule.log_every == 0 || step + 1 == schedule.steps) {
      const double mean = window_loss / static_cast<double>(window_n);
      local.loss_curve.push_back(mean);
      local.final_loss = mean;
      spdlog::info("step {}/{} loss {:.4f} lr {:.2e}", step + 1, schedule.steps,
                   mean, lr);
      window_loss = 0.0;
      window_n = 0;
    }
  }
  local.steps = schedule.steps;
  if (!dev.empty()) {
    local.dev_loss = EvaluateMlmLoss(model, dev, schedule.mask_prob,
                                     MixSeed(cfg.seed, 0xde5));
    local.dev_perplexity = std::exp(local.dev_loss);
    spdlog::info("dev masked-token perplexity {:.3f}", local.dev_perplexity);
  }
  if (report) *report = local;
  return model;
}

}  // namespace uprobe
