#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ehrqa/engine/result_set.hpp"
#include "ehrqa/engine/sql.hpp"
#include "ehrqa/engine/triple_store.hpp"

namespace ehrqa {

struct PatternTerm {
  enum class Kind { variable, iri, literal };
  Kind kind = Kind::variable;
  std::string value;  // variable name without '?', IRI text, or literal
  Literal literal;    // span info when kind == literal

  bool operator==(const PatternTerm&) const = default;
};

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;

  bool operator==(const TriplePattern&) const = default;
};

struct SparqlSelectItem {
  Aggregate aggregate = Aggregate::none;
  std::string variable;

  bool operator==(const SparqlSelectItem&) const = default;
};

// select <items> where { (<s> <p> <o> .)+ }
struct SparqlQuery {
  std::vector<SparqlSelectItem> select;
  std::vector<TriplePattern> patterns;

  bool operator==(const SparqlQuery&) const = default;
};

// Throws SyntaxError, or UnboundVariable when a selected variable occurs in
// no pattern.
SparqlQuery parse_sparql(std::string_view text);
std::string print_sparql(const SparqlQuery& q);

// Basic graph pattern matching by backtracking; bindings projected to the
// selected variables, aggregates as in SQL.
ResultSet execute_sparql(const TripleStore& store, const SparqlQuery& q);

}  // namespace ehrqa
