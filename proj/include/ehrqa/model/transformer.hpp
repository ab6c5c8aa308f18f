#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ehrqa/common/rng.hpp"
#include "ehrqa/model/config.hpp"
#include "ehrqa/model/input.hpp"

namespace ehrqa {

using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Flat parameter or gradient storage. Over-aligned so that vectorized kernels
// take the same code path, and sum in the same order, on every run.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

// Offsets of every tensor inside the flat parameter vector. Matrices are
// row-major with shape (in, out) so that y = x W + b.
struct LayerLayout {
  std::size_t ln1_g, ln1_b;
  std::size_t wq, bq, wk, bk, wv, bv, wo, bo;
  std::size_t ln2_g, ln2_b;
  std::size_t w1, b1, w2, b2;
};

struct ParamLayout {
  explicit ParamLayout(const ModelConfig& c);

  std::size_t tok = 0, pos = 0, seg = 0;
  std::vector<LayerLayout> layers;
  std::size_t lnf_g = 0, lnf_b = 0, out_b = 0;
  std::size_t total = 0;
};

// Token, position and segment embeddings; L pre-norm blocks; final layer
// norm; output projection tied to the token embedding plus an output bias.
class Model {
 public:
  explicit Model(const ModelConfig& cfg);  // all parameters zero
  static Model init(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  bool operator==(const Model& o) const { return cfg_ == o.cfg_ && params_ == o.params_; }

 private:
  ModelConfig cfg_;
  ParamLayout layout_;
  ParamVector params_;
};

struct LayerCache {
  MatR x_in;
  MatR xhat1;
  Eigen::VectorXd rstd1;
  MatR q, k, v;
  std::vector<MatR> probs;  // per head, T x T
  MatR attn_out;            // concatenated heads, before Wo
  MatR drop1;
  MatR x1;
  MatR xhat2;
  Eigen::VectorXd rstd2;
  MatR b;
  MatR pre_act;
  MatR act_grad;
  MatR act;
  MatR drop2;
};

struct ForwardCache {
  MatR drop_emb;
  std::vector<LayerCache> layers;
  MatR x_final;  // residual stream after the last block
  MatR xhat_f;
  Eigen::VectorXd rstd_f;

  // Residual stream entering each block plus the last block's output.
  std::vector<MatR> hidden_states() const;
  // layers x heads attention probabilities.
  std::vector<std::vector<MatR>> attention() const;
};

// Final hidden states (after the last layer norm), T x d. A null
// `dropout_rng` disables dropout. Throws ShapeMismatch on malformed input.
MatR forward_hidden(const Model& model, const TokenSequence& seq,
                    const AttentionMask& mask, Rng* dropout_rng,
                    ForwardCache* cache);

// hidden_rows x tied-embedding^T + output bias.
MatR output_logits(const Model& model, const MatR& hidden_rows);

// Logits for every position of the example, no dropout.
MatR forward(const Model& model, const Example& ex);

// Mean cross-entropy over labeled rows. Throws NoLabels.
double cross_entropy(const MatR& logits, std::span<const TokenId> labels);

// Mean loss over all labeled positions of the batch (both objectives pooled
// with equal weight) and its exact gradient, written into `grad`.
double loss_and_gradient(const Model& model, std::span<const Example> batch,
                         Rng* dropout_rng, ParamVector& grad);

// Same loss without dropout or gradients.
double batch_loss(const Model& model, std::span<const Example> batch);

// Key/value rows of every layer for an already processed prefix; lets the
// decoder extend a sequence one position at a time.
struct KvCache {
  std::vector<ParamVector> keys;    // per layer, rows x d
  std::vector<ParamVector> values;  // per layer, rows x d
  int rows = 0;
};

// Runs `ids` (at positions cache.rows, cache.rows + 1, ...) through the
// network. Row r attends to the first limits[r] rows of the extended
// sequence. When `persist` is set, the new keys/values are appended to the
// cache. Returns final hidden states for the new rows.
MatR forward_rows(const Model& model, std::span<const TokenId> ids,
                  std::span<const int> segments, std::span<const int> limits,
                  KvCache& cache, bool persist);

}  // namespace ehrqa
