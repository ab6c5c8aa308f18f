#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ehrqa/common/rng.hpp"
#include "ehrqa/model/config.hpp"
#include "ehrqa/tokenizer/vocab.hpp"

namespace ehrqa {

inline constexpr TokenId kNoLabel = -1;

// q_1..q_n [SEP] y_1..y_m [SEP]; segment 0 up to and including the first
// SEP, positions contiguous from 0. Throws TooLong past max_len.
TokenSequence build_input(std::span<const TokenId> q_ids,
                          std::span<const TokenId> y_ids, int max_len);

// Row-major (n+m+2)^2 matrix. Question rows (i <= n) see j <= n; query rows
// see j <= i.
class AttentionMask {
 public:
  AttentionMask() = default;
  AttentionMask(int size, std::vector<std::uint8_t> allowed)
      : size_(size), allowed_(std::move(allowed)) {}

  int size() const { return size_; }
  bool operator()(int i, int j) const {
    return allowed_[static_cast<std::size_t>(i) * static_cast<std::size_t>(size_) +
                    static_cast<std::size_t>(j)] != 0;
  }
  bool operator==(const AttentionMask&) const = default;

 private:
  int size_ = 0;
  std::vector<std::uint8_t> allowed_;
};

AttentionMask build_attention_mask(int n, int m);

struct Masked {
  std::vector<TokenId> ids;
  std::vector<TokenId> labels;  // kNoLabel where not selected
};

// Question-side masking with the mask/random/keep mix. Random replacements
// are drawn uniformly from the non-special ids [4, vocab_size).
Masked apply_input_masking(std::span<const TokenId> q_ids, const TrainConfig& cfg,
                           int vocab_size, Rng& rng);

// Query-side masking: each position (the final SEP included) is replaced by
// [MASK] with target_mask_prob. The input must end with SEP.
Masked apply_target_masking(std::span<const TokenId> y_with_sep,
                            const TrainConfig& cfg, Rng& rng);

// One training or evaluation example: the assembled sequence, its mask
// geometry and per-position labels.
struct Example {
  TokenSequence seq;
  int n = 0;  // question length (without SEP)
  int m = 0;  // query length (without SEP)
  std::vector<TokenId> labels;

  int size() const { return static_cast<int>(seq.ids.size()); }
  int label_count() const;
};

// Masks question and query sides and assembles the example. With
// input_mask_prob = 0 only query-side labels are produced.
Example make_example(std::span<const TokenId> q_ids, std::span<const TokenId> y_ids,
                     const TrainConfig& cfg, int vocab_size, int max_len, Rng& rng);

}  // namespace ehrqa
