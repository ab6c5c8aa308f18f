#include "ehrqa/eval/recovery.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "ehrqa/engine/sparql.hpp"
#include "ehrqa/engine/sql.hpp"
#include "ehrqa/eval/metrics.hpp"

namespace ehrqa {

namespace {

std::string canonical_value(std::string_view v) {
  const auto words = text::canonical_words(v);
  return text::render_tokens(words);
}

struct Slot {
  std::size_t begin = 0, end = 0;
  std::string value;
  const std::vector<std::string>* candidates = nullptr;
};

bool replaceable(const Literal& lit) { return lit.quoted && !text::parse_number(lit.value); }

std::optional<std::vector<Slot>> find_slots(std::string_view query, const ValueIndex& values) {
  std::vector<Slot> slots;
  try {
    const SqlQuery q = parse_sql(query);
    for (const auto& c : q.where) {
      if (!replaceable(c.literal)) continue;
      const auto* cands = values.column(c.column.table, c.column.column);
      slots.push_back({c.literal.token_begin, c.literal.token_end, c.literal.value,
                       cands ? cands : &values.all_text()});
    }
    return slots;
  } catch (const Error&) {
  }
  try {
    const SparqlQuery q = parse_sparql(query);
    for (const auto& p : q.patterns) {
      for (const PatternTerm* t : {&p.subject, &p.object}) {
        if (t->kind != PatternTerm::Kind::literal || !replaceable(t->literal)) continue;
        const std::vector<std::string>* cands = nullptr;
        if (p.predicate.kind == PatternTerm::Kind::iri && p.predicate.value.size() > 1) {
          cands = values.named(std::string_view(p.predicate.value).substr(1));
        }
        slots.push_back({t->literal.token_begin, t->literal.token_end, t->literal.value,
                         cands ? cands : &values.all_text()});
      }
    }
    std::sort(slots.begin(), slots.end(),
              [](const Slot& a, const Slot& b) { return a.begin < b.begin; });
    return slots;
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace

ValueIndex::ValueIndex(const Database& db) {
  std::map<std::string, std::set<std::string>, std::less<>> by_name;
  std::set<std::string> text_values;
  for (const auto& [name, table] : db.tables) {
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
      std::set<std::string> distinct;
      for (const auto& row : table.rows) distinct.insert(canonical_value(row[c]));
      const auto& col = table.schema[c];
      by_name[col.name].insert(distinct.begin(), distinct.end());
      if (col.kind == ColumnKind::text) text_values.insert(distinct.begin(), distinct.end());
      by_column_[name + "." + col.name] = {distinct.begin(), distinct.end()};
    }
  }
  for (auto& [name, set] : by_name) by_name_[name] = {set.begin(), set.end()};
  all_text_.assign(text_values.begin(), text_values.end());
}

const std::vector<std::string>* ValueIndex::column(std::string_view table,
                                                   std::string_view column) const {
  auto it = by_column_.find(std::string(table) + "." + std::string(column));
  return it == by_column_.end() ? nullptr : &it->second;
}

const std::vector<std::string>* ValueIndex::named(std::string_view column) const {
  auto it = by_name_.find(column);
  return it == by_name_.end() ? nullptr : &it->second;
}

std::string closest_value(std::string_view literal, const std::vector<std::string>& candidates) {
  std::string best;
  double best_score = -1.0;
  for (const auto& c : candidates) {
    const double s = rouge_l(literal, c);
    if (s > best_score || (s == best_score && c < best)) {
      best = c;
      best_score = s;
    }
  }
  return best;
}

Recovery recover(std::string_view query, const ValueIndex& values) {
  Recovery out{std::string(query), false, 0};
  const auto slots = find_slots(query, values);
  if (!slots) return out;
  out.parsed = true;
  const auto toks = text::canonical_words(query);
  std::vector<std::string> rebuilt;
  std::size_t at = 0;
  for (const auto& s : *slots) {
    const auto& cands = *s.candidates;
    if (cands.empty() || std::binary_search(cands.begin(), cands.end(), s.value)) continue;
    const std::string best = closest_value(s.value, cands);
    rebuilt.insert(rebuilt.end(), toks.begin() + static_cast<std::ptrdiff_t>(at),
                   toks.begin() + static_cast<std::ptrdiff_t>(s.begin));
    rebuilt.emplace_back("\"");
    const auto words = text::canonical_words(best);
    rebuilt.insert(rebuilt.end(), words.begin(), words.end());
    rebuilt.emplace_back("\"");
    at = s.end;
    ++out.replaced;
  }
  if (out.replaced == 0) return out;
  rebuilt.insert(rebuilt.end(), toks.begin() + static_cast<std::ptrdiff_t>(at), toks.end());
  out.query = text::render_tokens(rebuilt);
  return out;
}

std::string recover(std::string_view query, const Database& db) {
  return recover(query, ValueIndex(db)).query;
}

}  // namespace ehrqa
