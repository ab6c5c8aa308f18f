#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ehrqa/common/rng.hpp"

namespace ehrqa {

// Physical QWERTY neighbourhood over lowercase letters and digits.
class KeyboardMap {
 public:
  static const KeyboardMap& qwerty();

  // Empty when `c` is not on the map.
  const std::vector<char>& neighbours(char c) const;
  bool contains(char c) const { return !neighbours(c).empty(); }
  bool adjacent(char a, char b) const;
  std::vector<char> keys() const;

 private:
  KeyboardMap();
  std::vector<std::vector<char>> adj_;  // indexed by unsigned char
};

// Single-typo primitives. Indices are byte positions in `word`.
std::string reversal(std::string_view word, std::size_t i);
std::string substitution(std::string_view word, std::size_t i, Rng& rng);
std::string substitution(std::string_view word, std::size_t i, char replacement);
std::string deletion(std::string_view word, std::size_t i);
// Inserts before position i, 1 <= i <= len; the new character neighbours
// word[i - 1].
std::string insertion(std::string_view word, std::size_t i, Rng& rng);
std::string insertion(std::string_view word, std::size_t i, char inserted);

// Numbers, date/time shapes, and words no longer than l_min.
bool is_protected(std::string_view word, int l_min);

// The corruption gate p * ln(len) <= r_noise.
double gate_threshold(double p, std::size_t len);
bool passes_gate(double p, std::size_t len, double r_noise);

enum class NoiseLevel { weak, moderate, strong };

NoiseLevel parse_noise_level(std::string_view s);  // throws InvalidArgument
std::string_view to_string(NoiseLevel level);
double target_rate(NoiseLevel level);

struct NoiseConfig {
  double r_noise = 0.0;
  int l_min = 3;
  std::uint64_t seed = 0;
};

enum class TypoKind { none, insertion, deletion, substitution, reversal };

std::string_view to_string(TypoKind kind);

struct CorruptedQuestion {
  std::string text;
  std::vector<std::string> words;     // original words
  std::vector<std::string> noisy;     // corrupted words
  std::vector<TypoKind> kinds;        // per word
  std::vector<bool> protected_words;  // per word
};

// Every (stream, word index) pair has its own random stream, so the result
// for one question does not depend on which other questions are corrupted.
CorruptedQuestion corrupt_question_detailed(std::string_view q,
                                            const NoiseConfig& cfg,
                                            std::uint64_t stream = 0);
std::string corrupt_question(std::string_view q, const NoiseConfig& cfg,
                             std::uint64_t stream = 0);

// Stable stream id for a question identifier (FNV-1a).
std::uint64_t stream_of(std::string_view id);

// Fraction of words corrupted over `corpus` (question k uses stream k),
// averaged over `streams` derived seeds.
double corruption_rate(const std::vector<std::string>& corpus, double r_noise,
                       int l_min, std::uint64_t seed, int streams = 5);

// Bisection on r_noise in [0, 10] until the averaged corruption rate is
// within `tolerance` of target_rate. Throws InvalidArgument for a target
// outside (0, 1) and Unreachable when no r_noise gets close enough.
double calibrate_r_noise(const std::vector<std::string>& corpus,
                         double target_rate, int l_min, std::uint64_t seed,
                         int streams = 5, double tolerance = 0.005);

// Derived seed used for calibration stream k; stream 0 is `seed` itself.
std::uint64_t calibration_seed(std::uint64_t seed, int k);

}  // namespace ehrqa
