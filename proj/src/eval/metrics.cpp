#include "ehrqa/eval/metrics.hpp"

#include <algorithm>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "ehrqa/engine/sparql.hpp"
#include "ehrqa/engine/sql.hpp"

namespace ehrqa {

namespace {

using Span = std::pair<std::size_t, std::size_t>;

std::optional<std::vector<Span>> parsed_value_spans(std::string_view query) {
  std::vector<Span> spans;
  try {
    const SqlQuery q = parse_sql(query);
    for (const auto& c : q.where) spans.emplace_back(c.literal.token_begin, c.literal.token_end);
    return spans;
  } catch (const Error&) {
  }
  try {
    const SparqlQuery q = parse_sparql(query);
    for (const auto& p : q.patterns) {
      for (const PatternTerm* t : {&p.subject, &p.object}) {
        if (t->kind == PatternTerm::Kind::literal) {
          spans.emplace_back(t->literal.token_begin, t->literal.token_end);
        }
      }
    }
    std::sort(spans.begin(), spans.end());
    return spans;
  } catch (const Error&) {
  }
  return std::nullopt;
}

bool is_operator(const std::string& t) { return t == "=" || t == "<" || t == ">"; }

std::vector<std::string> mask_lexically(const std::vector<std::string>& toks) {
  std::vector<std::string> out;
  bool after_where = false;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string& t = toks[i];
    if (t == "\"") {
      std::size_t j = i + 1;
      while (j < toks.size() && toks[j] != "\"") ++j;
      out.emplace_back(kValuePlaceholder);
      i = j;
      continue;
    }
    out.push_back(t);
    if (t == "where") after_where = true;
    if (!after_where || !is_operator(t)) continue;
    if (t != "=" && i + 1 < toks.size() && toks[i + 1] == "=") out.push_back(toks[++i]);
    if (i + 1 < toks.size() && toks[i + 1] == "\"") continue;
    std::size_t j = i + 1;
    while (j < toks.size() && toks[j] != "and") ++j;
    if (j > i + 1) out.emplace_back(kValuePlaceholder);
    i = j - 1;
  }
  return out;
}

std::vector<std::string> rouge_units(std::string_view s) {
  return text::split_whitespace(text::to_lower(s));
}

}  // namespace

bool acc_lf(std::string_view pred, std::string_view gold) {
  return text::canonical_words(pred) == text::canonical_words(gold);
}

std::vector<std::string> mask_condition_values(std::string_view query) {
  const auto toks = text::canonical_words(query);
  const auto spans = parsed_value_spans(query);
  if (!spans) return mask_lexically(toks);
  std::vector<std::string> out;
  std::size_t at = 0;
  for (const auto& [b, e] : *spans) {
    out.insert(out.end(), toks.begin() + static_cast<std::ptrdiff_t>(at),
               toks.begin() + static_cast<std::ptrdiff_t>(b));
    out.emplace_back(kValuePlaceholder);
    at = e;
  }
  out.insert(out.end(), toks.begin() + static_cast<std::ptrdiff_t>(at), toks.end());
  return out;
}

bool acc_st(std::string_view pred, std::string_view gold) {
  return mask_condition_values(pred) == mask_condition_values(gold);
}

bool acc_ex(const QueryTarget& target, QueryLanguage lang, std::string_view pred,
            std::string_view gold) {
  ResultSet expected;
  try {
    expected = run_query(target, lang, gold);
  } catch (const Error& e) {
    throw GoldUnexecutable("gold query failed: " + std::string(e.what()));
  }
  try {
    return same_rows(run_query(target, lang, pred), expected);
  } catch (const Error&) {
    return false;
  }
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = rouge_units(candidate);
  const auto r = rouge_units(reference);
  if (c.empty() && r.empty()) return 1.0;
  if (c.empty() || r.empty()) return 0.0;
  std::size_t lcs, nc, nr;
  if (c.size() == 1 || r.size() == 1) {
    const std::string a = text::join(c, " "), b = text::join(r, " ");
    lcs = lcs_length(a, b);
    nc = a.size();
    nr = b.size();
  } else {
    lcs = lcs_length(c, r);
    nc = c.size();
    nr = r.size();
  }
  if (lcs == 0) return 0.0;
  const double recall = static_cast<double>(lcs) / static_cast<double>(nr);
  const double precision = static_cast<double>(lcs) / static_cast<double>(nc);
  return 2.0 * recall * precision / (recall + precision);
}

}  // namespace ehrqa
