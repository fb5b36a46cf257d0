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

#include "uprobe/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "uprobe/binio.hpp"
#include "uprobe/errors.hpp"

namespace uprobe {
namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr std::uint32_t kCheckpointVersion = 1;

// ---------------------------------------------------------------- helpers

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd inv_std;
};

Matrix LayerNormForward(const Matrix& x, const Matrix& gain,
                        const Matrix& bias, LayerNormCache* cache) {
  const Eigen::VectorXd mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  const Eigen::VectorXd var =
      centered.array().square().rowwise().mean().matrix();
  const Eigen::VectorXd inv =
      (var.array() + kLayerNormEps).rsqrt().matrix();
  Matrix xhat = centered.array().colwise() * inv.array();
  Matrix y = (xhat.array().rowwise() * gain.row(0).array()).matrix();
  y.rowwise() += bias.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = inv;
  }
  return y;
}

Matrix LayerNormBackward(const Matrix& dy, const LayerNormCache& c,
                         const Matrix& gain, Matrix& dgain, Matrix& dbias) {
  dgain += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbias += dy.colwise().sum();
  const Matrix dxhat = (dy.array().rowwise() * gain.row(0).array()).matrix();
  const Eigen::VectorXd m1 = dxhat.rowwise().mean();
  const Eigen::VectorXd m2 =
      (dxhat.array() * c.xhat.array()).rowwise().mean().matrix();
  Matrix dx = dxhat.colwise() - m1;
  dx -= (c.xhat.array().colwise() * m2.array()).matrix();
  return dx.array().colwise() * c.inv_std.array();
}

double Gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
}

double GeluGrad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf =
      std::exp(-0.5 * x * x) * 0.5 * std::numbers::inv_sqrtpi *
      std::numbers::sqrt2;
  return cdf + x * pdf;
}

void SoftmaxRowsInPlace(Matrix& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    const double mx = row.maxCoeff();
    if (!std::isfinite(mx)) {  // fully masked row
      row.setZero();
      continue;
    }
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

struct BlockCache {
  Matrix x;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // softmax output per head
  std::vector<Matrix> keep;   // dropout factor per head (empty if none)
  std::vector<Matrix> applied;
  Matrix ctx;
  LayerNormCache ln1;
  Matrix h1;
  Matrix f1;
  Matrix g;
  LayerNormCache ln2;
};

struct AttentionRun {
  const Matrix* mask = nullptr;
  MaskMode mode = MaskMode::kPostSoftmax;
  std::mt19937_64* rng = nullptr;
  double dropout = 0.0;
  double key_dropout = 0.0;  // whole key columns, shared by all heads
  double key_zero_fraction = 0.0;
};

Matrix BlockForward(const ModelConfig& cfg, const BlockParams& p,
                    const Matrix& x, const AttentionRun& run,
                    BlockCache* cache, std::vector<Matrix>* attention_out) {
  const Eigen::Index T = x.rows();
  const int H = cfg.n_heads;
  const int dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix q = x * p.wq;
  q.rowwise() += p.bq.row(0);
  Matrix k = x * p.wk;
  k.rowwise() += p.bk.row(0);
  Matrix v = x * p.wv;
  v.rowwise() += p.bv.row(0);

  Matrix ctx(T, cfg.hidden_dim);
  if (cache) {
    cache->probs.assign(H, Matrix());
    cache->applied.assign(H, Matrix());
    cache->keep.assign(H, Matrix());
  }
  if (attention_out) attention_out->assign(H, Matrix());

  std::bernoulli_distribution keep_draw(1.0 - run.dropout);
  // 1 keeps a key, 0 removes it before the softmax, -1 zeroes it after.
  Eigen::RowVectorXd key_keep;
  bool any_zeroed = false;
  if (run.rng && run.key_dropout > 0.0) {
    std::bernoulli_distribution key_draw(1.0 - run.key_dropout);
    std::bernoulli_distribution zero_draw(run.key_zero_fraction);
    key_keep.resize(T);
    for (Eigen::Index j = 0; j < T; ++j) {
      if (key_draw(*run.rng)) {
        key_keep(j) = 1.0;
      } else if (run.key_zero_fraction > 0.0 && zero_draw(*run.rng)) {
        key_keep(j) = -1.0;
        any_zeroed = true;
      } else {
        key_keep(j) = 0.0;
      }
    }
  }
  for (int h = 0; h < H; ++h) {
    Matrix s = (q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose()) *
               scale;
    if (run.mask && run.mode == MaskMode::kPreSoftmax) {
      s = (run.mask->array() > 0.0)
              .select(s.array(), -std::numeric_limits<double>::infinity())
              .matrix();
    }
    if (key_keep.size() > 0) {
      // Dropped keys leave the softmax entirely; a query always keeps itself.
      for (Eigen::Index j = 0; j < T; ++j) {
        if (key_keep(j) != 0.0) continue;
        for (Eigen::Index i = 0; i < T; ++i) {
          if (i != j) s(i, j) = -std::numeric_limits<double>::infinity();
        }
      }
    }
    SoftmaxRowsInPlace(s);
    Matrix applied = s;
    if (run.mask && run.mode != MaskMode::kPreSoftmax) {
      applied.array() *= run.mask->array();
      if (run.mode == MaskMode::kPostSoftmaxRenormalize) {
        for (Eigen::Index i = 0; i < T; ++i) {
          const double sum = applied.row(i).sum();
          if (sum > 0.0) applied.row(i) /= sum;
        }
      }
    }
    Matrix keep;
    if (run.rng && run.dropout > 0.0) {
      keep.resize(T, T);
      const double inv_keep = 1.0 / (1.0 - run.dropout);
      for (Eigen::Index i = 0; i < T; ++i) {
        for (Eigen::Index j = 0; j < T; ++j) {
          keep(i, j) = keep_draw(*run.rng) ? inv_keep : 0.0;
        }
      }
    }
    if (any_zeroed) {
      if (keep.size() == 0) keep = Matrix::Ones(T, T);
      for (Eigen::Index j = 0; j < T; ++j) {
        if (key_keep(j) >= 0.0) continue;
        for (Eigen::Index i = 0; i < T; ++i) {
          if (i != j) keep(i, j) = 0.0;
        }
      }
    }
    if (keep.size() > 0) applied.array() *= keep.array();
    ctx.middleCols(h * dh, dh).noalias() = applied * v.middleCols(h * dh, dh);
    if (attention_out) (*attention_out)[h] = applied;
    if (cache) {
      cache->probs[h] = std::move(s);
      cache->applied[h] = std::move(applied);
      cache->keep[h] = std::move(keep);
    }
  }

  Matrix attn_out = ctx * p.wo;
  attn_out.rowwise() += p.bo.row(0);
  Matrix h1 = LayerNormForward(x + attn_out, p.ln1_gain, p.ln1_bias,
                               cache ? &cache->ln1 : nullptr);
  Matrix f1 = h1 * p.w1;
  f1.rowwise() += p.b1.row(0);
  Matrix g = f1.unaryExpr([](double z) { return Gelu(z); });
  Matrix f2 = g * p.w2;
  f2.rowwise() += p.b2.row(0);
  Matrix out = LayerNormForward(h1 + f2, p.ln2_gain, p.ln2_bias,
                                cache ? &cache->ln2 : nullptr);
  if (cache) {
    cache->x = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->ctx = std::move(ctx);
    cache->h1 = std::move(h1);
    cache->f1 = std::move(f1);
    cache->g = std::move(g);
  }
  return out;
}

// Returns d(loss)/d(block input); accumulates parameter gradients into gp.
Matrix BlockBackward(const ModelConfig& cfg, const BlockParams& p,
                     const BlockCache& c, const Matrix& dout,
                     BlockParams& gp) {
  const int H = cfg.n_heads;
  const int dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Matrix dr2 = LayerNormBackward(dout, c.ln2, p.ln2_gain, gp.ln2_gain,
                                       gp.ln2_bias);
  gp.w2.noalias() += c.g.transpose() * dr2;
  gp.b2 += dr2.colwise().sum();
  const Matrix dg = dr2 * p.w2.transpose();
  const Matrix df1 =
      dg.array() * c.f1.unaryExpr([](double z) { return GeluGrad(z); }).array();
  gp.w1.noalias() += c.h1.transpose() * df1;
  gp.b1 += df1.colwise().sum();
  Matrix dh1 = dr2;
  dh1.noalias() += df1 * p.w1.transpose();

  const Matrix dr1 = LayerNormBackward(dh1, c.ln1, p.ln1_gain, gp.ln1_gain,
                                       gp.ln1_bias);
  Matrix dx = dr1;
  gp.wo.noalias() += c.ctx.transpose() * dr1;
  gp.bo += dr1.colwise().sum();
  const Matrix dctx = dr1 * p.wo.transpose();

  Matrix dq(c.q.rows(), c.q.cols());
  Matrix dk(c.k.rows(), c.k.cols());
  Matrix dv(c.v.rows(), c.v.cols());
  for (int h = 0; h < H; ++h) {
    const auto dctx_h = dctx.middleCols(h * dh, dh);
    Matrix dapplied = dctx_h * c.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh).noalias() = c.applied[h].transpose() * dctx_h;
    if (c.keep[h].size() > 0) dapplied.array() *= c.keep[h].array();
    const Matrix& a = c.probs[h];
    const Eigen::VectorXd inner =
        (dapplied.array() * a.array()).rowwise().sum().matrix();
    Matrix ds = a.array() * (dapplied.colwise() - inner).array();
    ds *= scale;
    dq.middleCols(h * dh, dh).noalias() = ds * c.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh).noalias() =
        ds.transpose() * c.q.middleCols(h * dh, dh);
  }
  gp.wq.noalias() += c.x.transpose() * dq;
  gp.bq += dq.colwise().sum();
  gp.wk.noalias() += c.x.transpose() * dk;
  gp.bk += dk.colwise().sum();
  gp.wv.noalias() += c.x.transpose() * dv;
  gp.bv += dv.colwise().sum();
  dx.noalias() += dq * p.wq.transpose();
  dx.noalias() += dk * p.wk.transpose();
  dx.noalias() += dv * p.wv.transpose();
  return dx;
}

void CheckIds(const ModelConfig& cfg, std::span<const int> ids) {
  if (ids.empty()) throw Error(ErrorKind::kInput, "empty token sequence");
  if (static_cast<int>(ids.size()) > cfg.max_seq_len) {
    throw Error(ErrorKind::kInput,
                "sequence of length " + std::to_string(ids.size()) +
                    " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
  }
  for (int id : ids) {
    if (id < 0 || id >= cfg.vocab_size) {
      throw Error(ErrorKind::kInput,
                  "token id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(cfg.vocab_size));
    }
  }
}

Matrix EmbedTokens(const Params& p, std::span<const int> ids) {
  Matrix e(static_cast<Eigen::Index>(ids.size()), p.token_embedding.cols());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    e.row(static_cast<Eigen::Index>(t)) = p.token_embedding.row(ids[t]);
  }
  return e;
}

void ApplyProjections(const std::vector<const ProjectRepresentation*>& ps,
                      Matrix& h) {
  for (const auto* pr : ps) {
    for (std::size_t pos : pr->positions) {
      const auto r = static_cast<Eigen::Index>(pos);
      const Eigen::RowVectorXd row = h.row(r);
      h.row(r).noalias() = row * pr->matrix->transpose();
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- config

std::string_view ToString(MaskMode mode) {
  switch (mode) {
    case MaskMode::kPostSoftmax: return "post_softmax";
    case MaskMode::kPostSoftmaxRenormalize: return "post_softmax_renormalize";
    case MaskMode::kPreSoftmax: return "pre_softmax";
  }
  return "post_softmax";
}

MaskMode ParseMaskMode(std::string_view text) {
  if (text == "post_softmax") return MaskMode::kPostSoftmax;
  if (text == "post_softmax_renormalize") {
    return MaskMode::kPostSoftmaxRenormalize;
  }
  if (text == "pre_softmax") return MaskMode::kPreSoftmax;
  throw Error(ErrorKind::kParse,
              "unknown mask mode \"" + std::string(text) + "\"");
}

void ValidateModelConfig(const ModelConfig& c) {
  auto check = [](bool ok, const std::string& m) {
    if (!ok) throw Error(ErrorKind::kConfig, m);
  };
  check(c.n_layers > 0, "n_layers must be positive");
  check(c.n_heads > 0, "n_heads must be positive");
  check(c.hidden_dim > 0, "hidden_dim must be positive");
  check(c.ffn_dim > 0, "ffn_dim must be positive");
  check(c.max_seq_len > 0, "max_seq_len must be positive");
  check(c.vocab_size > 0, "vocab_size must be positive");
  check(c.hidden_dim % c.n_heads == 0,
        "hidden_dim must be divisible by n_heads");
  check(c.mask_token_id >= 0 && c.mask_token_id < c.vocab_size,
        "mask_token_id must be below vocab_size");
}

Params ZerosLike(const Params& like) {
  Params z = like;
  VisitTensors(z, [](const std::string&, Matrix& m, bool) { m.setZero(); });
  return z;
}

std::size_t ParameterCount(const Params& p) {
  std::size_t n = 0;
  VisitTensors(p, [&n](const std::string&, const Matrix& m, bool) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

// ---------------------------------------------------------------- model

Model::Model(ModelConfig config, Vocabulary vocab, Params params)
    : config_(std::move(config)),
      vocab_(std::move(vocab)),
      params_(std::move(params)) {
  ValidateModelConfig(config_);
  if (vocab_.size() != config_.vocab_size) {
    throw Error(ErrorKind::kConfig, "vocabulary size does not match config");
  }
}

Model Model::Initialize(const ModelConfig& config, const Vocabulary& vocab) {
  ModelConfig cfg = config;
  cfg.vocab_size = vocab.size();
  ValidateModelConfig(cfg);
  const int d = cfg.hidden_dim;
  const int f = cfg.ffn_dim;
  const int V = cfg.vocab_size;

  Params p;
  p.token_embedding = Matrix(V, d);
  p.position_embedding = Matrix(cfg.max_seq_len, d);
  p.emb_ln_gain = Matrix::Ones(1, d);
  p.emb_ln_bias = Matrix::Zero(1, d);
  p.blocks.resize(cfg.n_layers);
  for (auto& b : p.blocks) {
    b.wq = b.wk = b.wv = b.wo = Matrix(d, d);
    b.bq = b.bk = b.bv = b.bo = Matrix::Zero(1, d);
    b.ln1_gain = b.ln2_gain = Matrix::Ones(1, d);
    b.ln1_bias = b.ln2_bias = Matrix::Zero(1, d);
    b.w1 = Matrix(d, f);
    b.b1 = Matrix::Zero(1, f);
    b.w2 = Matrix(f, d);
    b.b2 = Matrix::Zero(1, d);
  }
  p.out_w = Matrix(d, V);
  p.out_b = Matrix::Zero(1, V);

  std::mt19937_64 rng(cfg.seed);
  VisitTensors(p, [&rng](const std::string& name, Matrix& m, bool decays) {
    if (!decays) return;  // gains/biases keep their constant init
    const bool embedding = name.find("embedding") != std::string::npos;
    const double sd =
        embedding ? 0.1 : 1.0 / std::sqrt(static_cast<double>(m.rows()));
    std::normal_distribution<double> dist(0.0, sd);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
    }
  });
  return Model(cfg, vocab, std::move(p));
}

ForwardTrace Model::Forward(std::span<const int> ids,
                            std::span<const InterventionSpec> interventions,
                            const ForwardOptions& options) const {
  CheckIds(config_, ids);
  const std::size_t T = ids.size();
  const int L = config_.n_layers;
  const auto d = static_cast<Eigen::Index>(config_.hidden_dim);

  std::vector<std::vector<const ProjectRepresentation*>> projections(L + 1);
  std::vector<Matrix> block_masks(L);
  std::vector<bool> has_mask(L, false);
  for (const auto& iv : interventions) {
    if (const auto* pr = std::get_if<ProjectRepresentation>(&iv)) {
      if (pr->layer < 0 || pr->layer > L) {
        throw Error(ErrorKind::kIntervention,
                    "projection layer " + std::to_string(pr->layer) +
                        " outside [0, " + std::to_string(L) + "]");
      }
      if (!pr->matrix || pr->matrix->rows() != d || pr->matrix->cols() != d) {
        throw Error(ErrorKind::kIntervention,
                    "projection matrix must be " + std::to_string(d) + "x" +
                        std::to_string(d));
      }
      for (auto pos : pr->positions) {
        if (pos >= T) {
          throw Error(ErrorKind::kIntervention,
                      "projection position " + std::to_string(pos) +
                          " outside sequence of length " + std::to_string(T));
        }
      }
      projections[pr->layer].push_back(pr);
    } else {
      const auto& spec = std::get<MaskAttention>(iv).spec;
      if (spec.first_layer < 0 || spec.last_layer >= L ||
          spec.first_layer > spec.last_layer) {
        throw Error(ErrorKind::kIntervention,
                    "attention layer range [" +
                        std::to_string(spec.first_layer) + ", " +
                        std::to_string(spec.last_layer) +
                        "] invalid for " + std::to_string(L) + " blocks");
      }
      Matrix m;
      try {
        m = BuildMask(spec, T);
      } catch (const Error& e) {
        throw Error(ErrorKind::kIntervention, e.what());
      }
      for (int l = spec.first_layer; l <= spec.last_layer; ++l) {
        if (has_mask[l]) {
          block_masks[l].array() *= m.array();
        } else {
          block_masks[l] = m;
          has_mask[l] = true;
        }
      }
    }
  }

  ForwardTrace trace;
  Matrix h = EmbedTokens(params_, ids);
  if (options.record_hidden) trace.hidden.push_back(h);
  ApplyProjections(projections[0], h);
  if (options.record_hidden) trace.consumed.push_back(h);

  Matrix x = h + params_.position_embedding.topRows(static_cast<Eigen::Index>(T));
  x = LayerNormForward(x, params_.emb_ln_gain, params_.emb_ln_bias, nullptr);
  for (int l = 0; l < L; ++l) {
    AttentionRun run;
    run.mask = has_mask[l] ? &block_masks[l] : nullptr;
    run.mode = config_.mask_mode;
    std::vector<Matrix> attn;
    x = BlockForward(config_, params_.blocks[l], x, run, nullptr,
                     options.record_attention ? &attn : nullptr);
    if (options.record_attention) trace.attention.push_back(std::move(attn));
    if (options.record_hidden) trace.hidden.push_back(x);
    ApplyProjections(projections[l + 1], x);
    if (options.record_hidden) trace.consumed.push_back(x);
  }
  trace.logits = x * params_.out_w;
  trace.logits.rowwise() += params_.out_b.row(0);
  return trace;
}

Matrix Model::Logits(std::span<const int> ids,
                     std::span<const InterventionSpec> interventions) const {
  ForwardOptions opts;
  opts.record_hidden = false;
  opts.record_attention = false;
  return Forward(ids, interventions, opts).logits;
}

std::vector<int> MaskTarget(const Vocabulary& vocab,
                            const AgreementInstance& inst) {
  ValidateInstance(inst);
  std::vector<int> ids = vocab.Encode(inst.tokens);
  ids[inst.target_index] = Vocabulary::kMaskId;
  return ids;
}

// ---------------------------------------------------------------- training

double LossAndGradient(const ModelConfig& cfg, const Params& p,
                       const MaskedExample& ex, Params* grad,
                       double grad_scale, std::mt19937_64* dropout_rng,
                       double attention_dropout, double key_dropout,
                       double key_zero_fraction) {
  CheckIds(cfg, ex.input_ids);
  if (ex.positions.empty() || ex.positions.size() != ex.labels.size()) {
    throw Error(ErrorKind::kInput, "masked example without targets");
  }
  const auto T = static_cast<Eigen::Index>(ex.input_ids.size());
  const int L = cfg.n_layers;

  const Matrix e0 = EmbedTokens(p, ex.input_ids) + p.position_embedding.topRows(T);
  LayerNormCache emb_cache;
  Matrix x = LayerNormForward(e0, p.emb_ln_gain, p.emb_ln_bias,
                              grad ? &emb_cache : nullptr);
  std::vector<BlockCache> caches(grad ? L : 0);
  for (int l = 0; l < L; ++l) {
    AttentionRun run;
    run.rng = dropout_rng;
    run.dropout = dropout_rng ? attention_dropout : 0.0;
    run.key_dropout = dropout_rng ? key_dropout : 0.0;
    run.key_zero_fraction = key_zero_fraction;
    x = BlockForward(cfg, p.blocks[l], x, run, grad ? &caches[l] : nullptr,
                     nullptr);
  }

  const auto m = static_cast<Eigen::Index>(ex.positions.size());
  Matrix xm(m, x.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    xm.row(i) = x.row(static_cast<Eigen::Index>(ex.positions[i]));
  }
  Matrix logits = xm * p.out_w;
  logits.rowwise() += p.out_b.row(0);

  double loss = 0.0;
  Matrix dlogits(m, logits.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    auto row = logits.row(i);
    const double mx = row.maxCoeff();
    Eigen::RowVectorXd prob = (row.array() - mx).exp();
    const double z = prob.sum();
    loss += std::log(z) + mx - row(ex.labels[i]);
    prob /= z;
    prob(ex.labels[i]) -= 1.0;
    dlogits.row(i) = prob;
  }
  loss /= static_cast<double>(m);
  if (!grad) return loss;

  dlogits *= grad_scale / static_cast<double>(m);
  grad->out_w.noalias() += xm.transpose() * dlogits;
  grad->out_b += dlogits.colwise().sum();
  const Matrix dxm = dlogits * p.out_w.transpose();
  Matrix dx = Matrix::Zero(T, x.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    dx.row(static_cast<Eigen::Index>(ex.positions[i])) += dxm.row(i);
  }
  for (int l = L - 1; l >= 0; --l) {
    dx = BlockBackward(cfg, p.blocks[l], caches[l], dx, grad->blocks[l]);
  }
  const Matrix de0 = LayerNormBackward(dx, emb_cache, p.emb_ln_gain,
                                       grad->emb_ln_gain, grad->emb_ln_bias);
  for (Eigen::Index t = 0; t < T; ++t) {
    grad->token_embedding.row(ex.input_ids[t]) += de0.row(t);
    grad->position_embedding.row(t) += de0.row(t);
  }
  return loss;
}

// ---------------------------------------------------------------- checkpoint

void SaveModel(const Model& model, const std::string& path) {
  const ModelConfig& c = model.config();
  nlohmann::ordered_json j;
  j["n_layers"] = c.n_layers;
  j["n_heads"] = c.n_heads;
  j["hidden_dim"] = c.hidden_dim;
  j["ffn_dim"] = c.ffn_dim;
  j["vocab_size"] = c.vocab_size;
  j["max_seq_len"] = c.max_seq_len;
  j["mask_token_id"] = c.mask_token_id;
  j["seed"] = c.seed;
  j["mask_mode"] = std::string(ToString(c.mask_mode));
  j["vocabulary"] = model.vocab().words();
  j["lemmas"] = model.vocab().lemmas();
  const std::string config_text = j.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  binio::WriteMagic(out, "UPML");
  binio::WriteU32(out, kCheckpointVersion);
  binio::WriteU32(out, static_cast<std::uint32_t>(config_text.size()));
  out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
  VisitTensors(model.params(),
               [&out](const std::string&, const Matrix& m, bool) {
                 std::vector<float> buf;
                 buf.reserve(static_cast<std::size_t>(m.size()));
                 for (Eigen::Index i = 0; i < m.rows(); ++i) {
                   for (Eigen::Index k = 0; k < m.cols(); ++k) {
                     buf.push_back(static_cast<float>(m(i, k)));
                   }
                 }
                 binio::WriteF32s(out, buf);
               });
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

Model LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path);
  binio::ExpectMagic(in, "UPML", "checkpoint");
  const std::uint32_t version = binio::ReadU32(in, "checkpoint");
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::kParse, "unsupported checkpoint version " +
                                       std::to_string(version));
  }
  const std::uint32_t len = binio::ReadU32(in, "checkpoint");
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (static_cast<std::uint32_t>(in.gcount()) != len) {
    throw Error(ErrorKind::kParse, "truncated checkpoint config");
  }
  ModelConfig c;
  Vocabulary vocab;
  try {
    const auto j = nlohmann::json::parse(text);
    c.n_layers = j.at("n_layers");
    c.n_heads = j.at("n_heads");
    c.hidden_dim = j.at("hidden_dim");
    c.ffn_dim = j.at("ffn_dim");
    c.vocab_size = j.at("vocab_size");
    c.max_seq_len = j.at("max_seq_len");
    c.mask_token_id = j.at("mask_token_id");
    c.seed = j.at("seed");
    c.mask_mode = ParseMaskMode(j.at("mask_mode").get<std::string>());
    const auto words = j.at("vocabulary").get<std::vector<std::string>>();
    const auto lemmas = j.at("lemmas").get<std::vector<std::string>>();
    if (words.size() != lemmas.size() || words.size() < 3) {
      throw Error(ErrorKind::kParse, "malformed checkpoint vocabulary");
    }
    for (std::size_t i = 3; i < words.size(); ++i) vocab.Add(words[i], lemmas[i]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("checkpoint config: ") + e.what());
  }
  ValidateModelConfig(c);

  Model shape = Model::Initialize(c, vocab);
  Params p = shape.params();
  VisitTensors(p, [&in](const std::string&, Matrix& m, bool) {
    std::vector<float> buf(static_cast<std::size_t>(m.size()));
    binio::ReadF32s(in, buf, "checkpoint");
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = buf[idx++];
    }
  });
  return Model(c, std::move(vocab), std::move(p));
}

}  // namespace uprobe
