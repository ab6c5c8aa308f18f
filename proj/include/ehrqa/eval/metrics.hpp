#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ehrqa/engine/query.hpp"

namespace ehrqa {

inline constexpr std::string_view kValuePlaceholder = "<val>";

// Token-exact comparison of canonical forms.
bool acc_lf(std::string_view pred, std::string_view gold);

// Canonical tokens with every condition value (quotes included) replaced by
// one `<val>` token. Queries that parse as SQL or SPARQL are masked from the
// parse; anything else is masked lexically: quoted runs, and after `where`
// the tokens right of a comparison operator up to the next `and`.
std::vector<std::string> mask_condition_values(std::string_view query);

// acc_lf after masking condition values on both sides.
bool acc_st(std::string_view pred, std::string_view gold);

// Whether the prediction executes to the same multiset of rows as the gold
// query. An unexecutable prediction scores false; an unexecutable gold query
// throws GoldUnexecutable.
bool acc_ex(const QueryTarget& target, QueryLanguage lang, std::string_view pred,
            std::string_view gold);

// ROUGE-L F1 over whitespace words; when either side is a single word the
// LCS is taken over characters instead. Two empty inputs score 1.
double rouge_l(std::string_view candidate, std::string_view reference);

// Length of the longest common subsequence.
template <typename Seq>
std::size_t lcs_length(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace ehrqa
