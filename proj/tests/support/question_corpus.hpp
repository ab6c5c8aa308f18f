#pragma once

#include <string>
#include <vector>

#include "ehrqa/corpus/corpus.hpp"

namespace fixture {

// Questions from the generated corpus, at least `min_words` words in total.
inline std::vector<std::string> questions(std::size_t min_words, std::uint64_t seed = 1) {
  ehrqa::Database db = ehrqa::generate_database(seed, ehrqa::Scale::small);
  auto pairs = ehrqa::generate_pairs(db, ehrqa::default_templates(),
                                     static_cast<int>(min_words / 5), seed);
  std::vector<std::string> out;
  std::size_t words = 0;
  for (const auto& p : pairs) {
    out.push_back(p.question);
    std::size_t n = 0;
    bool in_word = false;
    for (char c : p.question) {
      const bool space = c == ' ';
      if (!space && !in_word) ++n;
      in_word = !space;
    }
    words += n;
    if (words >= min_words) break;
  }
  return out;
}

}  // namespace fixture
