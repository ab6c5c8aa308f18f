#pragma once

#include <span>
#include <vector>

#include "ehrqa/model/transformer.hpp"

namespace ehrqa {

// An output sequence with its summed token log-probability. `tokens` never
// includes the terminal SEP; `finished` records whether SEP was emitted.
struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  bool finished = false;

  // Sum of token log-probs divided by the number of scored tokens (the SEP
  // of a finished hypothesis counts as one).
  double normalized() const;
};

// Encodes the question once, then extends the query one position at a time
// by scoring a [MASK] row appended after the current prefix.
class IncrementalDecoder {
 public:
  IncrementalDecoder(const Model& model, std::span<const TokenId> q_ids);

  // Log-probabilities over the vocabulary for the next query position.
  Eigen::RowVectorXd next_log_probs();
  // Appends a decoded token as a regular query-side row.
  void push(TokenId id);
  // Remaining positions before max_len is reached.
  int room() const;
  int generated() const { return generated_; }

 private:
  const Model* model_;
  KvCache cache_;
  int generated_ = 0;
};

// Token ids that may be emitted: everything but PAD and MASK.
bool emittable(TokenId id);

Hypothesis decode_greedy_scored(const Model& model, std::span<const TokenId> q_ids,
                                int max_out);
std::vector<TokenId> decode_greedy(const Model& model, std::span<const TokenId> q_ids,
                                   int max_out);

Hypothesis decode_beam_scored(const Model& model, std::span<const TokenId> q_ids,
                              int beam, int max_out);
std::vector<TokenId> decode_beam(const Model& model, std::span<const TokenId> q_ids,
                                 int beam, int max_out);

// Scores a given output by running one full forward pass per step, without
// the key/value cache.
Hypothesis score_output(const Model& model, std::span<const TokenId> q_ids,
                        std::span<const TokenId> y_ids, bool finished);

// Orders by normalized score, then lexicographically smaller tokens, then
// finished before unfinished. Returns true when `a` ranks above `b`.
bool ranks_above(const Hypothesis& a, const Hypothesis& b);

}  // namespace ehrqa
