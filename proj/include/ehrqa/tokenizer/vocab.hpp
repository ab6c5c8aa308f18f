#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ehrqa {

using TokenId = int;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kSep = 2;
inline constexpr TokenId kMask = 3;
inline constexpr TokenId kNumSpecial = 4;

inline constexpr std::string_view kContinuation = "##";

class Vocab {
 public:
  // Starts with the four special tokens only.
  Vocab();

  std::size_t size() const { return tokens_.size(); }
  std::optional<TokenId> id_of(std::string_view token) const;
  const std::string& token_of(TokenId id) const;  // throws UnknownId
  bool is_special(TokenId id) const { return id >= 0 && id < kNumSpecial; }

  // Returns the existing id when the token is already present.
  TokenId add(std::string_view token);

  std::string format() const;
  static Vocab parse(std::string_view content);  // throws ParseError
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Pair-merge subword learning over canonical words. Every seen character is
// present both as a word-initial token and as a `##` continuation. Merges
// the most frequent adjacent pair (ties: lexicographically smallest pair)
// until the vocabulary reaches `target_size` or no pair occurs twice.
// Throws EmptyCorpus when the texts contain no words.
Vocab train_vocab(const std::vector<std::string>& texts, int target_size,
                  std::uint64_t seed);

// Lowercases, splits on whitespace and punctuation, then greedy
// longest-match per word. A word that cannot be fully matched becomes UNK.
std::vector<TokenId> encode(const Vocab& v, std::string_view text);
std::vector<TokenId> encode_word(const Vocab& v, std::string_view word);

// Joins continuations and separates words with single spaces. Specials are
// dropped unless `keep_specials`. Throws UnknownId.
std::string decode(const Vocab& v, std::span<const TokenId> ids,
                   bool keep_specials = false);

// decode() followed by query-text rendering, e.g. `patients.subject_id`
// instead of `patients . subject _ id`.
std::string decode_query(const Vocab& v, std::span<const TokenId> ids);

// Model input for one (question, query) pair:
// q_1..q_n [SEP] y_1..y_m [SEP].
struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<int> segments;
  std::vector<int> positions;

  bool operator==(const TokenSequence&) const = default;
};

}  // namespace ehrqa
