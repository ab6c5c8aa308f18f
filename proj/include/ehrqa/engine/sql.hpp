#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ehrqa/corpus/database.hpp"
#include "ehrqa/engine/result_set.hpp"

namespace ehrqa {

enum class CompareOp { eq, lt, gt, le, ge };

std::string_view to_string(CompareOp op);

struct ColumnRef {
  std::string table;
  std::string column;

  bool operator==(const ColumnRef&) const = default;
};

// A condition value. `value` is the canonical form (lowercase, single
// spaced); `quoted` records whether it was written as a string literal.
// [token_begin, token_end) is its span in canonical_tokens(source),
// quotes included.
struct Literal {
  std::string value;
  bool quoted = true;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;

  bool operator==(const Literal&) const = default;
};

struct SelectItem {
  Aggregate aggregate = Aggregate::none;
  ColumnRef column;

  bool operator==(const SelectItem&) const = default;
};

struct JoinClause {
  std::string table;
  ColumnRef left;
  ColumnRef right;

  bool operator==(const JoinClause&) const = default;
};

struct Condition {
  ColumnRef column;
  CompareOp op = CompareOp::eq;
  Literal literal;

  bool operator==(const Condition&) const = default;
};

// select <items> from <t> (inner join <t> on <a> = <b>)* (where <cond> (and <cond>)*)?
struct SqlQuery {
  std::vector<SelectItem> select;
  std::string from;
  std::vector<JoinClause> joins;
  std::vector<Condition> where;

  bool operator==(const SqlQuery&) const = default;
};

// Throws SyntaxError. Table/column resolution is deferred to execution.
SqlQuery parse_sql(std::string_view text);

// Canonical text; parse_sql(print_sql(q)) reproduces q's structure.
std::string print_sql(const SqlQuery& q);

// Inner joins by hash join on the equality keys, conjunctive filters, then
// projection or aggregation. Throws UnknownTable, UnknownColumn,
// TypeMismatch. Never modifies `db`.
ResultSet execute_sql(const Database& db, const SqlQuery& q);

}  // namespace ehrqa
