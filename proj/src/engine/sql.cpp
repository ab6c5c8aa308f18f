#include "ehrqa/engine/sql.hpp"

#include <map>
#include <set>
#include <unordered_map>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "token_cursor.hpp"

namespace ehrqa {

namespace {

const std::vector<std::string_view> kReserved = {
    "select", "from", "where", "inner", "join", "on", "and", "distinct"};

ColumnRef parse_column_ref(detail::TokenCursor& c) {
  ColumnRef ref;
  ref.table = c.identifier("table name", kReserved);
  c.expect(".");
  ref.column = c.identifier("column name", kReserved);
  return ref;
}

SelectItem parse_select_item(detail::TokenCursor& c) {
  SelectItem item;
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
    item.column = parse_column_ref(c);
    c.expect(")");
    return item;
  }
  item.column = parse_column_ref(c);
  return item;
}

CompareOp parse_op(detail::TokenCursor& c) {
  if (c.accept("=")) return CompareOp::eq;
  if (c.accept("<")) return c.accept("=") ? CompareOp::le : CompareOp::lt;
  if (c.accept(">")) return c.accept("=") ? CompareOp::ge : CompareOp::gt;
  c.fail("expected a comparison operator" + c.found());
}

std::string ref_text(const ColumnRef& r) { return r.table + "." + r.column; }

std::string literal_text(const Literal& lit) {
  return lit.quoted ? "\"" + lit.value + "\"" : lit.value;
}

bool is_numeric_kind(ColumnKind k) {
  return k == ColumnKind::integer || k == ColumnKind::real;
}

bool compare(std::string_view cell, CompareOp op, const std::string& lit) {
  if (op == CompareOp::eq) return values_equal(cell, lit);
  const auto a = text::parse_number(cell);
  const auto b = text::parse_number(lit);
  if (!a || !b) {
    throw TypeMismatch("ordering comparison between '" + std::string(cell) +
                       "' and '" + lit + "'");
  }
  switch (op) {
    case CompareOp::lt:
      return *a < *b;
    case CompareOp::gt:
      return *a > *b;
    case CompareOp::le:
      return *a <= *b;
    case CompareOp::ge:
      return *a >= *b;
    case CompareOp::eq:
      break;
  }
  return false;
}

struct Resolved {
  std::size_t slot = 0;
  std::size_t column = 0;
};

}  // namespace

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::eq:
      return "=";
    case CompareOp::lt:
      return "<";
    case CompareOp::gt:
      return ">";
    case CompareOp::le:
      return "<=";
    case CompareOp::ge:
      return ">=";
  }
  return "=";
}

SqlQuery parse_sql(std::string_view source) {
  detail::TokenCursor c(source);
  SqlQuery q;
  c.expect("select");
  do {
    q.select.push_back(parse_select_item(c));
  } while (c.accept(","));
  c.expect("from");
  q.from = c.identifier("table name", kReserved);
  while (c.accept("inner")) {
    c.expect("join");
    JoinClause j;
    j.table = c.identifier("table name", kReserved);
    c.expect("on");
    j.left = parse_column_ref(c);
    c.expect("=");
    j.right = parse_column_ref(c);
    q.joins.push_back(std::move(j));
  }
  if (c.accept("where")) {
    do {
      Condition cond;
      cond.column = parse_column_ref(c);
      cond.op = parse_op(c);
      cond.literal = c.literal();
      q.where.push_back(std::move(cond));
    } while (c.accept("and"));
  }
  if (!c.at_end()) c.fail("unexpected token '" + c.peek() + "'");

  bool any_agg = false;
  bool any_plain = false;
  for (const auto& item : q.select) {
    (item.aggregate == Aggregate::none ? any_plain : any_agg) = true;
  }
  if (any_agg && any_plain) {
    throw SyntaxError("aggregate and plain columns mixed without grouping", 0);
  }
  std::set<std::string> seen{q.from};
  for (const auto& j : q.joins) {
    if (!seen.insert(j.table).second) {
      throw SyntaxError("table '" + j.table + "' joined twice", 0);
    }
  }
  return q;
}

std::string print_sql(const SqlQuery& q) {
  std::string s = "select";
  for (std::size_t i = 0; i < q.select.size(); ++i) {
    const auto& item = q.select[i];
    if (i > 0) s += " ,";
    switch (item.aggregate) {
      case Aggregate::none:
        s += " " + ref_text(item.column);
        break;
      case Aggregate::count_distinct:
        s += " count ( distinct " + ref_text(item.column) + " )";
        break;
      default:
        s += " " + std::string(to_string(item.aggregate)) + " ( " +
             ref_text(item.column) + " )";
        break;
    }
  }
  s += " from " + q.from;
  for (const auto& j : q.joins) {
    s += " inner join " + j.table + " on " + ref_text(j.left) + " = " +
         ref_text(j.right);
  }
  for (std::size_t i = 0; i < q.where.size(); ++i) {
    const auto& cond = q.where[i];
    s += i == 0 ? " where " : " and ";
    s += ref_text(cond.column) + " " + std::string(to_string(cond.op)) + " " +
         literal_text(cond.literal);
  }
  const auto words = text::canonical_words(s);
  return text::render_tokens(words);
}

ResultSet execute_sql(const Database& db, const SqlQuery& q) {
  std::vector<const Table*> tables;
  std::map<std::string, std::size_t> slot_of;
  auto add_table = [&](const std::string& name) {
    tables.push_back(&db.table(name));
    slot_of[name] = tables.size() - 1;
  };
  add_table(q.from);
  for (const auto& j : q.joins) add_table(j.table);

  auto resolve = [&](const ColumnRef& ref) {
    auto it = slot_of.find(ref.table);
    if (it == slot_of.end()) {
      if (!db.has_table(ref.table)) {
        throw UnknownTable("unknown table '" + ref.table + "'");
      }
      throw UnknownTable("table '" + ref.table +
                         "' is not in the from/join clauses");
    }
    const auto col = tables[it->second]->column_index(ref.column);
    if (!col) throw UnknownColumn("unknown column '" + ref_text(ref) + "'");
    return Resolved{it->second, *col};
  };
  auto kind_of = [&](const Resolved& r) {
    return tables[r.slot]->schema[r.column].kind;
  };

  std::vector<Resolved> select_cols;
  for (const auto& item : q.select) {
    const Resolved r = resolve(item.column);
    if (item.aggregate == Aggregate::avg && !is_numeric_kind(kind_of(r))) {
      throw TypeMismatch("avg over non-numeric column '" +
                         ref_text(item.column) + "'");
    }
    select_cols.push_back(r);
  }
  std::vector<std::pair<Resolved, Resolved>> edges;
  for (const auto& j : q.joins) edges.emplace_back(resolve(j.left), resolve(j.right));
  std::vector<Resolved> cond_cols;
  for (const auto& cond : q.where) {
    const Resolved r = resolve(cond.column);
    if (cond.op != CompareOp::eq &&
        (!is_numeric_kind(kind_of(r)) || !text::parse_number(cond.literal.value))) {
      throw TypeMismatch("ordering comparison on '" + ref_text(cond.column) +
                         "' with '" + cond.literal.value + "'");
    }
    cond_cols.push_back(r);
  }

  // Single-table conditions are applied before joining.
  const std::size_t width = tables.size();
  std::vector<std::vector<std::size_t>> live(width);
  for (std::size_t slot = 0; slot < width; ++slot) {
    for (std::size_t r = 0; r < tables[slot]->rows.size(); ++r) {
      bool ok = true;
      for (std::size_t i = 0; i < q.where.size() && ok; ++i) {
        if (cond_cols[i].slot != slot) continue;
        ok = compare(tables[slot]->rows[r][cond_cols[i].column], q.where[i].op,
                     q.where[i].literal.value);
      }
      if (ok) live[slot].push_back(r);
    }
  }

  // Tuples hold one row index per table slot.
  std::vector<std::vector<std::size_t>> tuples;
  tuples.reserve(live[0].size());
  for (std::size_t r : live[0]) {
    std::vector<std::size_t> t(width, 0);
    t[0] = r;
    tuples.push_back(std::move(t));
  }
  std::vector<bool> joined(width, false);
  joined[0] = true;
  std::vector<bool> used(edges.size(), false);
  auto cell = [&](const std::vector<std::size_t>& t, const Resolved& r)
      -> const std::string& { return tables[r.slot]->rows[t[r.slot]][r.column]; };

  for (std::size_t remaining = width - 1; remaining > 0; --remaining) {
    std::size_t pick = edges.size();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (used[e]) continue;
      if (joined[edges[e].first.slot] != joined[edges[e].second.slot]) {
        pick = e;
        break;
      }
    }
    if (pick == edges.size()) {
      throw UnknownTable("join clauses do not connect every table to '" +
                         q.from + "'");
    }
    used[pick] = true;
    Resolved probe = edges[pick].first;
    Resolved build = edges[pick].second;
    if (!joined[probe.slot]) std::swap(probe, build);

    std::unordered_map<std::string, std::vector<std::size_t>> index;
    const Table& build_table = *tables[build.slot];
    for (std::size_t r : live[build.slot]) {
      index[value_key(build_table.rows[r][build.column])].push_back(r);
    }
    std::vector<std::vector<std::size_t>> next;
    for (const auto& t : tuples) {
      auto it = index.find(value_key(cell(t, probe)));
      if (it == index.end()) continue;
      for (std::size_t r : it->second) {
        auto extended = t;
        extended[build.slot] = r;
        next.push_back(std::move(extended));
      }
    }
    tuples = std::move(next);
    joined[build.slot] = true;
  }

  std::vector<std::vector<std::size_t>> kept;
  for (auto& t : tuples) {
    bool ok = true;
    for (std::size_t e = 0; e < edges.size() && ok; ++e) {
      if (!used[e]) ok = values_equal(cell(t, edges[e].first), cell(t, edges[e].second));
    }
    if (ok) kept.push_back(std::move(t));
  }

  ResultSet result;
  for (const auto& item : q.select) {
    result.columns.push_back(
        item.aggregate == Aggregate::none
            ? ref_text(item.column)
            : std::string(to_string(item.aggregate)) + "(" +
                  ref_text(item.column) + ")");
  }
  const bool aggregated = !q.select.empty() && q.select[0].aggregate != Aggregate::none;
  if (aggregated) {
    std::vector<std::string> row;
    for (std::size_t i = 0; i < q.select.size(); ++i) {
      std::vector<std::string> values;
      values.reserve(kept.size());
      for (const auto& t : kept) values.push_back(cell(t, select_cols[i]));
      row.push_back(aggregate_values(q.select[i].aggregate, std::move(values)));
    }
    result.rows.push_back(std::move(row));
  } else {
    for (const auto& t : kept) {
      std::vector<std::string> row;
      for (const auto& r : select_cols) row.push_back(cell(t, r));
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace ehrqa
