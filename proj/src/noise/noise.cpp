#include "ehrqa/noise/noise.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"

namespace ehrqa {

namespace {

struct KeyRow {
  std::string_view keys;
  double offset;
};

constexpr std::array<KeyRow, 4> kRows = {{
    {"1234567890", 0.0},
    {"qwertyuiop", 0.5},
    {"asdfghjkl", 0.75},
    {"zxcvbnm", 1.25},
}};

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

void check_index(std::size_t i, std::size_t limit, std::string_view what) {
  if (i >= limit) {
    throw IndexOutOfRange(std::string(what) + ": index " + std::to_string(i) +
                          " out of range");
  }
}

}  // namespace

KeyboardMap::KeyboardMap() : adj_(256) {
  for (std::size_t r = 0; r < kRows.size(); ++r) {
    for (std::size_t i = 0; i < kRows[r].keys.size(); ++i) {
      const char c = kRows[r].keys[i];
      const double x = kRows[r].offset + static_cast<double>(i);
      auto& out = adj_[static_cast<unsigned char>(c)];
      for (std::size_t r2 = 0; r2 < kRows.size(); ++r2) {
        const long dr = static_cast<long>(r2) - static_cast<long>(r);
        if (dr < -1 || dr > 1) continue;
        for (std::size_t j = 0; j < kRows[r2].keys.size(); ++j) {
          if (r2 == r && j == i) continue;
          const double dx = std::abs(kRows[r2].offset + static_cast<double>(j) - x);
          const bool near = dr == 0 ? dx == 1.0 : dx < 1.0;
          if (near) out.push_back(kRows[r2].keys[j]);
        }
      }
      std::sort(out.begin(), out.end());
    }
  }
}

const KeyboardMap& KeyboardMap::qwerty() {
  static const KeyboardMap map;
  return map;
}

const std::vector<char>& KeyboardMap::neighbours(char c) const {
  return adj_[static_cast<unsigned char>(
      std::tolower(static_cast<unsigned char>(c)))];
}

bool KeyboardMap::adjacent(char a, char b) const {
  const auto& n = neighbours(a);
  return std::find(n.begin(), n.end(), b) != n.end();
}

std::vector<char> KeyboardMap::keys() const {
  std::vector<char> out;
  for (int c = 0; c < 256; ++c) {
    if (!adj_[static_cast<std::size_t>(c)].empty()) out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string reversal(std::string_view word, std::size_t i) {
  if (word.size() < 2 || i + 1 >= word.size()) {
    throw IndexOutOfRange("reversal: index " + std::to_string(i) + " out of range");
  }
  std::string out(word);
  std::swap(out[i], out[i + 1]);
  return out;
}

std::string substitution(std::string_view word, std::size_t i, char replacement) {
  check_index(i, word.size(), "substitution");
  if (!KeyboardMap::qwerty().adjacent(word[i], replacement)) {
    throw NoAdjacency(std::string("'") + replacement + "' is not next to '" +
                      word[i] + "'");
  }
  std::string out(word);
  out[i] = replacement;
  return out;
}

std::string substitution(std::string_view word, std::size_t i, Rng& rng) {
  check_index(i, word.size(), "substitution");
  const auto& n = KeyboardMap::qwerty().neighbours(word[i]);
  if (n.empty()) {
    throw NoAdjacency(std::string("no keyboard neighbours for '") + word[i] + "'");
  }
  return substitution(word, i, n[rng.below(n.size())]);
}

std::string deletion(std::string_view word, std::size_t i) {
  if (word.size() < 2) throw WordTooShort("deletion needs at least two characters");
  check_index(i, word.size(), "deletion");
  std::string out(word);
  out.erase(i, 1);
  return out;
}

std::string insertion(std::string_view word, std::size_t i, char inserted) {
  if (i < 1 || i > word.size()) {
    throw IndexOutOfRange("insertion: position " + std::to_string(i) + " out of range");
  }
  if (!KeyboardMap::qwerty().adjacent(word[i - 1], inserted)) {
    throw NoAdjacency(std::string("'") + inserted + "' is not next to '" +
                      word[i - 1] + "'");
  }
  std::string out(word);
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(i), inserted);
  return out;
}

std::string insertion(std::string_view word, std::size_t i, Rng& rng) {
  if (i < 1 || i > word.size()) {
    throw IndexOutOfRange("insertion: position " + std::to_string(i) + " out of range");
  }
  const auto& n = KeyboardMap::qwerty().neighbours(word[i - 1]);
  if (n.empty()) {
    throw NoAdjacency(std::string("no keyboard neighbours for '") + word[i - 1] + "'");
  }
  return insertion(word, i, n[rng.below(n.size())]);
}

bool is_protected(std::string_view word, int l_min) {
  if (static_cast<long>(word.size()) <= l_min) return true;
  // Surrounding punctuation such as a trailing '?' does not hide a number.
  std::size_t b = 0, e = word.size();
  while (b < e && text::is_split_punct(word[b])) ++b;
  while (e > b && text::is_split_punct(word[e - 1])) --e;
  const std::string core(word.substr(b, e - b));
  if (core.empty()) return false;
  if (text::parse_number(core)) return true;
  static const std::regex date_time(
      R"((\d{4}-\d{2}-\d{2})|(\d{2}:\d{2}:\d{2})|(\d{4}-\d{2}-\d{2}[T ]?\d{2}:\d{2}:\d{2}))");
  return std::regex_match(core, date_time);
}

double gate_threshold(double p, std::size_t len) {
  return p * std::log(static_cast<double>(std::max<std::size_t>(len, 1)));
}

bool passes_gate(double p, std::size_t len, double r_noise) {
  return gate_threshold(p, len) <= r_noise;
}

NoiseLevel parse_noise_level(std::string_view s) {
  if (s == "weak") return NoiseLevel::weak;
  if (s == "moderate") return NoiseLevel::moderate;
  if (s == "strong") return NoiseLevel::strong;
  throw InvalidArgument("unknown noise level '" + std::string(s) +
                        "' (expected weak, moderate or strong)");
}

std::string_view to_string(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::weak:
      return "weak";
    case NoiseLevel::moderate:
      return "moderate";
    case NoiseLevel::strong:
      return "strong";
  }
  return "weak";
}

double target_rate(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::weak:
      return 0.05;
    case NoiseLevel::moderate:
      return 0.10;
    case NoiseLevel::strong:
      return 0.15;
  }
  return 0.05;
}

std::string_view to_string(TypoKind kind) {
  switch (kind) {
    case TypoKind::none:
      return "none";
    case TypoKind::insertion:
      return "insertion";
    case TypoKind::deletion:
      return "deletion";
    case TypoKind::substitution:
      return "substitution";
    case TypoKind::reversal:
      return "reversal";
  }
  return "none";
}

namespace {

struct WordDraw {
  double threshold;  // the word is gated in iff threshold <= r_noise
  bool protected_word;
  TypoKind kind;     // typo applied when gated in and not protected
  std::string noisy;
};

std::vector<std::size_t> key_positions(std::string_view w) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_key_char(w[i])) out.push_back(i);
  }
  return out;
}

// Draws for one word in the order of the published algorithm: p, then r,
// then the position and character. None of the draws depends on r_noise.
WordDraw draw_word(const std::string& w, int l_min, Rng& rng) {
  WordDraw d;
  const double p = rng.uniform();
  d.threshold = gate_threshold(p, w.size());
  const double r = rng.uniform();
  d.protected_word = is_protected(w, l_min);
  d.kind = TypoKind::none;
  d.noisy = w;
  if (d.protected_word) return d;

  const auto keys = key_positions(w);
  std::vector<std::size_t> swaps;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (is_key_char(w[i]) && is_key_char(w[i + 1]) && w[i] != w[i + 1]) {
      swaps.push_back(i);
    }
  }
  auto reverse = [&] {
    if (swaps.empty()) return;
    d.noisy = reversal(w, swaps[rng.below(swaps.size())]);
    d.kind = TypoKind::reversal;
  };
  if (keys.empty()) return d;
  if (r < 0.15) {
    // Insert after a keyboard character.
    d.noisy = insertion(w, keys[rng.below(keys.size())] + 1, rng);
    d.kind = TypoKind::insertion;
  } else if (r < 0.30) {
    d.noisy = deletion(w, keys[rng.below(keys.size())]);
    d.kind = TypoKind::deletion;
  } else if (r < 0.50) {
    d.noisy = substitution(w, keys[rng.below(keys.size())], rng);
    d.kind = TypoKind::substitution;
  } else {
    reverse();
  }
  return d;
}

Rng word_rng(std::uint64_t seed, std::uint64_t stream, std::size_t word) {
  return Rng(mix_seed(mix_seed(seed, stream), word));
}

}  // namespace

CorruptedQuestion corrupt_question_detailed(std::string_view q,
                                            const NoiseConfig& cfg,
                                            std::uint64_t stream) {
  if (cfg.r_noise < 0.0) throw InvalidArgument("r_noise must be >= 0");
  if (cfg.l_min < 1) throw InvalidArgument("l_min must be >= 1");
  CorruptedQuestion out;
  out.words = text::split_whitespace(q);
  for (std::size_t i = 0; i < out.words.size(); ++i) {
    Rng rng = word_rng(cfg.seed, stream, i);
    WordDraw d = draw_word(out.words[i], cfg.l_min, rng);
    const bool corrupt = d.threshold <= cfg.r_noise && !d.protected_word &&
                         d.kind != TypoKind::none;
    out.noisy.push_back(corrupt ? d.noisy : out.words[i]);
    out.kinds.push_back(corrupt ? d.kind : TypoKind::none);
    out.protected_words.push_back(d.protected_word);
  }
  out.text = text::join(out.noisy, " ");
  return out;
}

std::string corrupt_question(std::string_view q, const NoiseConfig& cfg,
                             std::uint64_t stream) {
  return corrupt_question_detailed(q, cfg, stream).text;
}

std::uint64_t stream_of(std::string_view id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t calibration_seed(std::uint64_t seed, int k) {
  return k == 0 ? seed : mix_seed(seed, 0xca11b000ULL + static_cast<std::uint64_t>(k));
}

namespace {

// Thresholds of every word that would be corrupted once gated in, plus the
// total word count, over all calibration streams.
struct RateCurve {
  std::vector<double> thresholds;  // sorted
  std::size_t words = 0;

  double rate(double r_noise) const {
    if (words == 0) return 0.0;
    const auto n = std::upper_bound(thresholds.begin(), thresholds.end(), r_noise) -
                   thresholds.begin();
    return static_cast<double>(n) / static_cast<double>(words);
  }
};

RateCurve rate_curve(const std::vector<std::string>& corpus, int l_min,
                     std::uint64_t seed, int streams) {
  if (streams < 1) throw InvalidArgument("need at least one rng stream");
  if (l_min < 1) throw InvalidArgument("l_min must be >= 1");
  RateCurve c;
  for (int k = 0; k < streams; ++k) {
    const std::uint64_t s = calibration_seed(seed, k);
    for (std::size_t qi = 0; qi < corpus.size(); ++qi) {
      const auto words = text::split_whitespace(corpus[qi]);
      c.words += words.size();
      for (std::size_t wi = 0; wi < words.size(); ++wi) {
        Rng rng = word_rng(s, qi, wi);
        WordDraw d = draw_word(words[wi], l_min, rng);
        if (!d.protected_word && d.kind != TypoKind::none) {
          c.thresholds.push_back(d.threshold);
        }
      }
    }
  }
  std::sort(c.thresholds.begin(), c.thresholds.end());
  return c;
}

}  // namespace

double corruption_rate(const std::vector<std::string>& corpus, double r_noise,
                       int l_min, std::uint64_t seed, int streams) {
  return rate_curve(corpus, l_min, seed, streams).rate(r_noise);
}

double calibrate_r_noise(const std::vector<std::string>& corpus,
                         double target, int l_min, std::uint64_t seed,
                         int streams, double tolerance) {
  if (!(target > 0.0 && target < 1.0)) {
    throw InvalidArgument("target corruption rate must lie in (0, 1)");
  }
  const RateCurve curve = rate_curve(corpus, l_min, seed, streams);
  double lo = 0.0, hi = 10.0;
  if (curve.rate(hi) < target - tolerance) {
    throw Unreachable("even r_noise = 10 corrupts only " +
                      std::to_string(curve.rate(hi)) + " of words");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rate = curve.rate(mid);
    if (std::abs(rate - target) <= 0.25 * tolerance) return mid;
    (rate < target ? lo : hi) = mid;
    if (hi - lo < 1e-12) break;
  }
  // Bisection converged on the step where the curve crosses the target;
  // take whichever side lands closer.
  const double best = std::abs(curve.rate(lo) - target) <= std::abs(curve.rate(hi) - target)
                          ? lo
                          : hi;
  if (std::abs(curve.rate(best) - target) > tolerance) {
    throw Unreachable("closest corruption rate " + std::to_string(curve.rate(best)) +
                      " misses target " + std::to_string(target));
  }
  return best;
}

}  // namespace ehrqa
