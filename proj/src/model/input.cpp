#include "ehrqa/model/input.hpp"

#include <algorithm>

#include "ehrqa/common/error.hpp"

namespace ehrqa {

TokenSequence build_input(std::span<const TokenId> q_ids,
                          std::span<const TokenId> y_ids, int max_len) {
  const std::size_t total = q_ids.size() + y_ids.size() + 2;
  if (total > static_cast<std::size_t>(max_len)) {
    throw TooLong("sequence of " + std::to_string(total) + " tokens exceeds max_len " +
                  std::to_string(max_len));
  }
  TokenSequence s;
  s.ids.reserve(total);
  s.ids.insert(s.ids.end(), q_ids.begin(), q_ids.end());
  s.ids.push_back(kSep);
  s.ids.insert(s.ids.end(), y_ids.begin(), y_ids.end());
  s.ids.push_back(kSep);
  s.segments.assign(total, 1);
  std::fill(s.segments.begin(), s.segments.begin() + static_cast<std::ptrdiff_t>(q_ids.size() + 1), 0);
  s.positions.resize(total);
  for (std::size_t i = 0; i < total; ++i) s.positions[i] = static_cast<int>(i);
  return s;
}

AttentionMask build_attention_mask(int n, int m) {
  if (n < 0 || m < 0) throw InvalidArgument("negative segment length");
  const int t = n + m + 2;
  std::vector<std::uint8_t> allowed(static_cast<std::size_t>(t) * static_cast<std::size_t>(t), 0);
  for (int i = 0; i < t; ++i) {
    const int limit = i <= n ? n : i;
    for (int j = 0; j <= limit; ++j) {
      allowed[static_cast<std::size_t>(i) * static_cast<std::size_t>(t) + static_cast<std::size_t>(j)] = 1;
    }
  }
  return AttentionMask(t, std::move(allowed));
}

Masked apply_input_masking(std::span<const TokenId> q_ids, const TrainConfig& cfg,
                           int vocab_size, Rng& rng) {
  if (vocab_size <= kNumSpecial) throw InvalidArgument("vocabulary has no regular tokens");
  Masked out{{q_ids.begin(), q_ids.end()}, std::vector<TokenId>(q_ids.size(), kNoLabel)};
  for (std::size_t i = 0; i < q_ids.size(); ++i) {
    if (q_ids[i] < kNumSpecial && q_ids[i] != kUnk) {
      throw InvalidArgument("question ids must not contain PAD, SEP or MASK");
    }
    if (!rng.bernoulli(cfg.input_mask_prob)) continue;
    out.labels[i] = q_ids[i];
    const double r = rng.uniform();
    if (r < cfg.mix_mask) {
      out.ids[i] = kMask;
    } else if (r < cfg.mix_mask + cfg.mix_random) {
      out.ids[i] = kNumSpecial + static_cast<TokenId>(
                                     rng.below(static_cast<std::size_t>(vocab_size - kNumSpecial)));
    }
  }
  return out;
}

Masked apply_target_masking(std::span<const TokenId> y_with_sep,
                            const TrainConfig& cfg, Rng& rng) {
  if (y_with_sep.empty() || y_with_sep.back() != kSep) {
    throw InvalidArgument("target sequence must end with SEP");
  }
  Masked out{{y_with_sep.begin(), y_with_sep.end()},
             std::vector<TokenId>(y_with_sep.size(), kNoLabel)};
  for (std::size_t i = 0; i < y_with_sep.size(); ++i) {
    if (!rng.bernoulli(cfg.target_mask_prob)) continue;
    out.labels[i] = y_with_sep[i];
    out.ids[i] = kMask;
  }
  return out;
}

int Example::label_count() const {
  return static_cast<int>(std::count_if(labels.begin(), labels.end(),
                                        [](TokenId l) { return l != kNoLabel; }));
}

Example make_example(std::span<const TokenId> q_ids, std::span<const TokenId> y_ids,
                     const TrainConfig& cfg, int vocab_size, int max_len, Rng& rng) {
  Masked q = apply_input_masking(q_ids, cfg, vocab_size, rng);
  std::vector<TokenId> y(y_ids.begin(), y_ids.end());
  y.push_back(kSep);
  Masked t = apply_target_masking(y, cfg, rng);
  t.ids.pop_back();
  Example ex;
  ex.n = static_cast<int>(q_ids.size());
  ex.m = static_cast<int>(y_ids.size());
  ex.seq = build_input(q.ids, t.ids, max_len);
  // The final SEP may itself be masked.
  ex.seq.ids.back() = t.labels.back() != kNoLabel ? kMask : kSep;
  ex.labels = q.labels;
  ex.labels.push_back(kNoLabel);  // question-side SEP
  ex.labels.insert(ex.labels.end(), t.labels.begin(), t.labels.end());
  return ex;
}

}  // namespace ehrqa
