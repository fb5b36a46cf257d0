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

#ifndef UPROBE_TRAINING_HPP_
#define UPROBE_TRAINING_HPP_

#include <cstdint>
#include <vector>

#include "uprobe/corpus.hpp"
#include "uprobe/model.hpp"

namespace uprobe {

struct TrainSchedule {
  long steps = 4000;
  int batch_size = 32;
  double learning_rate = 2e-3;
  double warmup_fraction = 0.05;
  double weight_decay = 0.01;
  double grad_clip = 1.0;
  double mask_prob = 0.15;
  // Extra probability of masking the agreement target of each sentence on
  // top of the uniform masking.
  double target_mask_prob = 0.0;
  double attention_dropout = 0.1;
  // Probability of cutting every query's access to a key in one block.
  double key_dropout = 0.0;
  // Share of cut keys zeroed after the softmax rather than removed before it.
  double key_dropout_zero_fraction = 0.0;
  int log_every = 500;

  bool operator==(const TrainSchedule&) const = default;
};

void ValidateSchedule(const TrainSchedule& schedule);

struct TrainReport {
  long steps = 0;
  double final_loss = 0.0;  // mean over the last log window
  double dev_loss = 0.0;
  double dev_perplexity = 0.0;
  std::vector<double> loss_curve;  // one mean loss per log window
};

// Deterministic masking of one sentence: each position is masked with
// probability mask_prob (at least one position always), and the target with
// probability target_mask_prob.
MaskedExample MakeMaskedExample(const Vocabulary& vocab,
                                const AgreementInstance& inst,
                                double mask_prob, double target_mask_prob,
                                std::uint64_t seed);

// Masked-token cross-entropy (nats) over a dataset with masks drawn from
// `seed`.
double EvaluateMlmLoss(const Model& model, const Dataset& data,
                       double mask_prob, std::uint64_t seed);

// AdamW with linear warmup and decay. Initialization, data order, masking
// and dropout all derive from config.seed. Throws TrainingError when the
// loss becomes non-finite and Error(kData) on an empty corpus.
Model TrainMlm(const ModelConfig& config, const Vocabulary& vocab,
               const Dataset& train, const Dataset& dev,
               const TrainSchedule& schedule, TrainReport* report = nullptr);

}  // namespace uprobe

#endif  // UPROBE_TRAINING_HPP_
