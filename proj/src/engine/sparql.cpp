#include "ehrqa/engine/sparql.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "token_cursor.hpp"

namespace ehrqa {

namespace {

const std::vector<std::string_view> kReserved = {"select", "where", "distinct"};

bool is_iri_word(const std::string& w) {
  if (w.size() < 2 || w[0] != '/') return false;
  for (char c : w) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '/')) {
      return false;
    }
  }
  return true;
}

std::string parse_variable(detail::TokenCursor& c) {
  c.expect("?");
  return c.identifier("variable name", {});
}

PatternTerm parse_term(detail::TokenCursor& c) {
  PatternTerm t;
  if (c.peek() == "?") {
    t.kind = PatternTerm::Kind::variable;
    t.value = parse_variable(c);
    return t;
  }
  if (is_iri_word(c.peek())) {
    t.kind = PatternTerm::Kind::iri;
    t.value = c.next();
    while (c.peek() == "_" && detail::TokenCursor::is_alnum_word(c.peek(1))) {
      c.next();
      t.value += "_" + c.next();
    }
    return t;
  }
  t.kind = PatternTerm::Kind::literal;
  t.literal = c.literal();
  t.value = t.literal.value;
  return t;
}

std::string term_text(const PatternTerm& t) {
  switch (t.kind) {
    case PatternTerm::Kind::variable:
      return "?" + t.value;
    case PatternTerm::Kind::iri:
      return t.value;
    case PatternTerm::Kind::literal:
      return t.literal.quoted ? "\"" + t.value + "\"" : t.value;
  }
  return t.value;
}

// Backtracking matcher over the pattern list.
class Matcher {
 public:
  Matcher(const TripleStore& store, const std::vector<TriplePattern>& patterns,
          const std::map<std::string, std::size_t>& var_index)
      : store_(store), patterns_(patterns), var_index_(var_index),
        binding_(var_index.size(), kUnbound), done_(patterns.size(), false) {
    for (const auto& p : patterns_) {
      resolved_.push_back({resolve(p.subject), resolve(p.predicate),
                           resolve(p.object)});
    }
  }

  template <typename Emit>
  void run(Emit&& emit) {
    search(0, emit);
  }

 private:
  static constexpr std::int64_t kUnbound = -1;
  static constexpr std::int64_t kMissing = -2;  // constant absent from store

  struct Slot {
    bool variable = false;
    std::size_t var = 0;
    std::int64_t constant = kMissing;
    std::string literal;  // for numeric-aware literal comparison
    bool is_literal = false;
  };

  Slot resolve(const PatternTerm& t) const {
    Slot s;
    if (t.kind == PatternTerm::Kind::variable) {
      s.variable = true;
      s.var = var_index_.at(t.value);
      return s;
    }
    if (t.kind == PatternTerm::Kind::iri) {
      if (auto id = store_.find_iri(t.value)) s.constant = *id;
      return s;
    }
    s.is_literal = true;
    s.literal = t.value;
    if (auto id = store_.find_literal(t.value)) s.constant = *id;
    return s;
  }

  std::int64_t value_of(const Slot& s) const {
    return s.variable ? binding_[s.var] : s.constant;
  }

  bool bound(const Slot& s) const {
    return s.variable ? binding_[s.var] != kUnbound : true;
  }

  bool matches(const Slot& s, TermId id) const {
    if (s.variable) {
      return binding_[s.var] == kUnbound || binding_[s.var] == id;
    }
    if (s.is_literal) {
      const Term& t = store_.term(id);
      return t.literal && values_equal(t.value, s.literal);
    }
    return s.constant == id;
  }

  template <typename Emit>
  void search(std::size_t depth, Emit& emit) {
    if (depth == patterns_.size()) {
      emit(binding_);
      return;
    }
    // Most constrained pattern next.
    std::size_t best = patterns_.size();
    int best_score = -1;
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
      if (done_[i]) continue;
      const auto& r = resolved_[i];
      const int score = (bound(r[0]) ? 2 : 0) + (bound(r[1]) ? 1 : 0) +
                        (bound(r[2]) ? 2 : 0);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    const auto& r = resolved_[best];
    const std::int64_t s = value_of(r[0]);
    const std::int64_t p = value_of(r[1]);
    const std::int64_t o = value_of(r[2]);
    // Unbound predicate variables are not needed by the grammar's uses but
    // are supported by a full scan.
    if (p == kMissing || s == kMissing) return;
    if (o == kMissing && !(r[2].is_literal && text::parse_number(r[2].literal))) {
      return;
    }

    std::vector<std::size_t> all;
    const std::vector<std::size_t>* candidates = nullptr;
    if (p >= 0 && s >= 0) {
      candidates = &store_.with_subject_predicate(static_cast<TermId>(s),
                                                  static_cast<TermId>(p));
    } else if (p >= 0 && o >= 0 && !r[2].is_literal) {
      candidates = &store_.with_predicate_object(static_cast<TermId>(p),
                                                 static_cast<TermId>(o));
    } else if (p >= 0 && o >= 0 && !text::parse_number(r[2].literal)) {
      candidates = &store_.with_predicate_object(static_cast<TermId>(p),
                                                 static_cast<TermId>(o));
    } else if (p >= 0) {
      candidates = &store_.with_predicate(static_cast<TermId>(p));
    } else {
      all.resize(store_.triples().size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      candidates = &all;
    }

    done_[best] = true;
    for (std::size_t idx : *candidates) {
      const Triple& t = store_.triples()[idx];
      if (!matches(r[0], t.subject) || !matches(r[1], t.predicate) ||
          !matches(r[2], t.object)) {
        continue;
      }
      // Bind, remembering which variables this step introduced.
      std::size_t introduced[3];
      std::size_t n_introduced = 0;
      bool consistent = true;
      const TermId ids[3] = {t.subject, t.predicate, t.object};
      for (int k = 0; k < 3; ++k) {
        if (!r[k].variable) continue;
        auto& b = binding_[r[k].var];
        if (b == kUnbound) {
          b = ids[k];
          introduced[n_introduced++] = r[k].var;
        } else if (b != ids[k]) {
          consistent = false;
        }
      }
      if (consistent) search(depth + 1, emit);
      for (std::size_t k = 0; k < n_introduced; ++k) {
        binding_[introduced[k]] = kUnbound;
      }
    }
    done_[best] = false;
  }

  const TripleStore& store_;
  const std::vector<TriplePattern>& patterns_;
  const std::map<std::string, std::size_t>& var_index_;
  std::vector<std::array<Slot, 3>> resolved_;
  std::vector<std::int64_t> binding_;
  std::vector<bool> done_;
};

}  // namespace

SparqlQuery parse_sparql(std::string_view source) {
  detail::TokenCursor c(source);
  SparqlQuery q;
  c.expect("select");
  while (c.peek() != "where" && !c.at_end()) {
    SparqlSelectItem item;
    const std::string& head = c.peek();
    if (c.peek(1) == "(" &&
        (head == "count" || head == "min" || head == "max" || head == "avg")) {
      const std::string fn = c.next();
      c.expect("(");
      if (fn == "count") {
        c.expect("distinct");
        item.aggregate = Aggregate::count_distinct;
      } else {
        item.aggregate = fn == "min" ? Aggregate::min
                         : fn == "max" ? Aggregate::max
                                       : Aggregate::avg;
      }
      item.variable = parse_variable(c);
      c.expect(")");
    } else {
      item.variable = parse_variable(c);
    }
    q.select.push_back(std::move(item));
  }
  if (q.select.empty()) c.fail("expected at least one selected variable");
  c.expect("where");
  c.expect("{");
  while (c.peek() != "}" && !c.at_end()) {
    TriplePattern p;
    p.subject = parse_term(c);
    p.predicate = parse_term(c);
    p.object = parse_term(c);
    c.expect(".");
    q.patterns.push_back(std::move(p));
  }
  if (q.patterns.empty()) c.fail("empty graph pattern");
  c.expect("}");
  if (!c.at_end()) c.fail("unexpected token '" + c.peek() + "'");

  bool any_agg = false;
  bool any_plain = false;
  for (const auto& item : q.select) {
    (item.aggregate == Aggregate::none ? any_plain : any_agg) = true;
  }
  if (any_agg && any_plain) {
    throw SyntaxError("aggregate and plain variables mixed without grouping", 0);
  }
  std::set<std::string> vars;
  for (const auto& p : q.patterns) {
    for (const auto* t : {&p.subject, &p.predicate, &p.object}) {
      if (t->kind == PatternTerm::Kind::variable) vars.insert(t->value);
    }
  }
  for (const auto& item : q.select) {
    if (!vars.count(item.variable)) {
      throw UnboundVariable("selected variable ?" + item.variable +
                            " does not occur in any pattern");
    }
  }
  return q;
}

std::string print_sparql(const SparqlQuery& q) {
  std::string s = "select";
  for (const auto& item : q.select) {
    switch (item.aggregate) {
      case Aggregate::none:
        s += " ?" + item.variable;
        break;
      case Aggregate::count_distinct:
        s += " count ( distinct ?" + item.variable + " )";
        break;
      default:
        s += " " + std::string(to_string(item.aggregate)) + " ( ?" +
             item.variable + " )";
        break;
    }
  }
  s += " where {";
  for (const auto& p : q.patterns) {
    s += " " + term_text(p.subject) + " " + term_text(p.predicate) + " " +
         term_text(p.object) + " .";
  }
  s += " }";
  const auto words = text::canonical_words(s);
  return text::render_tokens(words);
}

ResultSet execute_sparql(const TripleStore& store, const SparqlQuery& q) {
  std::map<std::string, std::size_t> var_index;
  for (const auto& p : q.patterns) {
    for (const auto* t : {&p.subject, &p.predicate, &p.object}) {
      if (t->kind == PatternTerm::Kind::variable) {
        var_index.emplace(t->value, var_index.size());
      }
    }
  }
  for (const auto& item : q.select) {
    if (!var_index.count(item.variable)) {
      throw UnboundVariable("selected variable ?" + item.variable +
                            " does not occur in any pattern");
    }
  }
  std::vector<std::size_t> projection;
  for (const auto& item : q.select) projection.push_back(var_index[item.variable]);

  std::vector<std::vector<std::string>> rows;
  Matcher matcher(store, q.patterns, var_index);
  matcher.run([&](const std::vector<std::int64_t>& binding) {
    std::vector<std::string> row;
    row.reserve(projection.size());
    for (std::size_t v : projection) {
      row.push_back(store.term(static_cast<TermId>(binding[v])).value);
    }
    rows.push_back(std::move(row));
  });

  ResultSet result;
  for (const auto& item : q.select) {
    result.columns.push_back(item.aggregate == Aggregate::none
                                 ? "?" + item.variable
                                 : std::string(to_string(item.aggregate)) +
                                       "(?" + item.variable + ")");
  }
  if (q.select[0].aggregate != Aggregate::none) {
    std::vector<std::string> row;
    for (std::size_t i = 0; i < q.select.size(); ++i) {
      std::vector<std::string> values;
      values.reserve(rows.size());
      for (const auto& r : rows) values.push_back(r[i]);
      row.push_back(aggregate_values(q.select[i].aggregate, std::move(values)));
    }
    result.rows.push_back(std::move(row));
  } else {
    result.rows = std::move(rows);
  }
  return result;
}

}  // namespace ehrqa
