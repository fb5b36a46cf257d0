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

#ifndef UPROBE_MODEL_HPP_
#define UPROBE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "uprobe/attention_mask.hpp"
#include "uprobe/corpus.hpp"

namespace uprobe {

// How an attention mask M is combined with the attention weights A.
enum class MaskMode {
  kPostSoftmax,             // A ∘ M, rows left unnormalized
  kPostSoftmaxRenormalize,  // A ∘ M, rows rescaled to sum to one
  kPreSoftmax,              // scores set to -inf where M = 0
};

std::string_view ToString(MaskMode mode);
MaskMode ParseMaskMode(std::string_view text);

struct ModelConfig {
  int n_layers = 2;
  int n_heads = 4;
  int hidden_dim = 64;
  int ffn_dim = 256;
  int vocab_size = 0;
  int max_seq_len = 32;
  int mask_token_id = Vocabulary::kMaskId;
  std::uint64_t seed = 1;
  MaskMode mask_mode = MaskMode::kPostSoftmax;

  int head_dim() const { return hidden_dim / n_heads; }
  bool operator==(const ModelConfig&) const = default;
};

// Throws Error(kConfig) when d is not divisible by H, the mask id is out of
// range, or any size is non-positive.
void ValidateModelConfig(const ModelConfig& config);

using Matrix = Eigen::MatrixXd;

struct BlockParams {
  Matrix wq, wk, wv, wo;  // d x d
  Matrix bq, bk, bv, bo;  // 1 x d
  Matrix ln1_gain, ln1_bias;
  Matrix w1, b1;  // d x ffn, 1 x ffn
  Matrix w2, b2;  // ffn x d, 1 x d
  Matrix ln2_gain, ln2_bias;
};

struct Params {
  Matrix token_embedding;     // V x d
  Matrix position_embedding;  // max_seq_len x d
  Matrix emb_ln_gain, emb_ln_bias;
  std::vector<BlockParams> blocks;
  Matrix out_w;  // d x V
  Matrix out_b;  // 1 x V
};

// Visits every tensor in checkpoint order as fn(name, tensor, decays) where
// `decays` says whether weight decay applies to it.
template <typename P, typename Fn>
void VisitTensors(P& p, Fn&& fn) {
  fn("token_embedding", p.token_embedding, true);
  fn("position_embedding", p.position_embedding, true);
  fn("emb_ln_gain", p.emb_ln_gain, false);
  fn("emb_ln_bias", p.emb_ln_bias, false);
  for (std::size_t l = 0; l < p.blocks.size(); ++l) {
    auto& b = p.blocks[l];
    const std::string pre = "block" + std::to_string(l) + ".";
    fn(pre + "wq", b.wq, true);
    fn(pre + "bq", b.bq, false);
    fn(pre + "wk", b.wk, true);
    fn(pre + "bk", b.bk, false);
    fn(pre + "wv", b.wv, true);
    fn(pre + "bv", b.bv, false);
    fn(pre + "wo", b.wo, true);
    fn(pre + "bo", b.bo, false);
    fn(pre + "ln1_gain", b.ln1_gain, false);
    fn(pre + "ln1_bias", b.ln1_bias, false);
    fn(pre + "w1", b.w1, true);
    fn(pre + "b1", b.b1, false);
    fn(pre + "w2", b.w2, true);
    fn(pre + "b2", b.b2, false);
    fn(pre + "ln2_gain", b.ln2_gain, false);
    fn(pre + "ln2_bias", b.ln2_bias, false);
  }
  fn("out_w", p.out_w, true);
  fn("out_b", p.out_b, false);
}

// Same shapes as `like`, all zeros.
Params ZerosLike(const Params& like);
std::size_t ParameterCount(const Params& p);

// Replace the layer-`layer` representation at each listed position by
// matrix · r before the next layer consumes it. Layer 0 is the token
// embedding (before position embeddings are added); layer l > 0 is the
// output of transformer block l.
struct ProjectRepresentation {
  int layer = 0;
  std::vector<std::size_t> positions;
  std::shared_ptr<const Matrix> matrix;  // d x d
};

// Multiply the post-softmax attention of every head in the spec's block
// range by the spec's mask.
struct MaskAttention {
  AttentionMaskSpec spec;
};

using InterventionSpec = std::variant<ProjectRepresentation, MaskAttention>;

struct ForwardTrace {
  // [L+1] of T x d, as each layer produced them (before any projection at
  // that layer). hidden[0] holds token embeddings without positions.
  std::vector<Matrix> hidden;
  // [L+1] of T x d, what the following layer consumed (after projections).
  std::vector<Matrix> consumed;
  // [L][H] of T x T attention weights actually applied.
  std::vector<std::vector<Matrix>> attention;
  Matrix logits;  // T x V
};

struct ForwardOptions {
  bool record_hidden = true;
  bool record_attention = true;
};

class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab, Params params);

  // Random initialization driven by config.seed.
  static Model Initialize(const ModelConfig& config, const Vocabulary& vocab);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const Params& params() const { return params_; }
  Params& mutable_params() { return params_; }

  // Pure function of (parameters, ids, interventions). Throws
  // Error(kInput) for bad ids or over-long input and Error(kIntervention)
  // for out-of-range layers/positions or mis-shaped matrices.
  ForwardTrace Forward(std::span<const int> ids,
                       std::span<const InterventionSpec> interventions = {},
                       const ForwardOptions& options = {}) const;

  Matrix Logits(std::span<const int> ids,
                std::span<const InterventionSpec> interventions = {}) const;

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  Params params_;
};

// Encodes the instance with its target replaced by the mask token.
std::vector<int> MaskTarget(const Vocabulary& vocab,
                            const AgreementInstance& inst);

// Checkpoint: "UPML", u32 version, u32 config byte length, config JSON
// (model config plus vocabulary), then every tensor of VisitTensors as
// little-endian f32 in row-major order.
void SaveModel(const Model& model, const std::string& path);
Model LoadModel(const std::string& path);

// ---- Training internals (exposed for gradient checking) ----

struct MaskedExample {
  std::vector<int> input_ids;          // with mask tokens substituted
  std::vector<std::size_t> positions;  // masked positions
  std::vector<int> labels;             // original ids at those positions
};

// Mean cross-entropy over the masked positions. When `grad` is non-null
// the gradient is accumulated into it (scaled by `grad_scale`). With a
// non-null `dropout_rng`, inverted attention dropout of rate
// `attention_dropout` is applied, and each key of each block is removed
// from every other query's softmax, in all heads, with probability
// `key_dropout`. A fraction `key_zero_fraction` of those keys are instead
// zeroed after the softmax, leaving the rows unnormalized.
double LossAndGradient(const ModelConfig& config, const Params& params,
                       const MaskedExample& example, Params* grad,
                       double grad_scale = 1.0,
                       std::mt19937_64* dropout_rng = nullptr,
                       double attention_dropout = 0.0,
                       double key_dropout = 0.0,
                       double key_zero_fraction = 0.0);

}  // namespace uprobe

#endif  // UPROBE_MODEL_HPP_
