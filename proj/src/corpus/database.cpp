#include "ehrqa/corpus/database.hpp"

#include <regex>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"

namespace ehrqa {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::text:
      return "text";
    case ColumnKind::integer:
      return "integer";
    case ColumnKind::real:
      return "real";
    case ColumnKind::datetime:
      return "datetime";
  }
  return "text";
}

std::optional<ColumnKind> parse_column_kind(std::string_view s) {
  if (s == "text") return ColumnKind::text;
  if (s == "integer") return ColumnKind::integer;
  if (s == "real") return ColumnKind::real;
  if (s == "datetime") return ColumnKind::datetime;
  return std::nullopt;
}

bool value_matches_kind(std::string_view value, ColumnKind kind) {
  switch (kind) {
    case ColumnKind::text:
      return value.find('\t') == std::string_view::npos &&
             value.find('\n') == std::string_view::npos;
    case ColumnKind::integer: {
      if (value.find('.') != std::string_view::npos) return false;
      return text::parse_number(value).has_value();
    }
    case ColumnKind::real:
      return text::parse_number(value).has_value();
    case ColumnKind::datetime: {
      static const std::regex re(R"(\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2})");
      return std::regex_match(value.begin(), value.end(), re);
    }
  }
  return false;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return i;
  }
  return std::nullopt;
}

const Table& Database::table(std::string_view name) const {
  auto it = tables.find(std::string(name));
  if (it == tables.end()) {
    throw UnknownTable("unknown table '" + std::string(name) + "'");
  }
  return it->second;
}

bool Database::has_table(std::string_view name) const {
  return tables.count(std::string(name)) > 0;
}

void Database::validate() const {
  for (const auto& [name, table] : tables) {
    if (!is_identifier(name)) {
      throw ParseError("table name '" + name + "' is not [a-z0-9_]+");
    }
    for (const auto& col : table.schema) {
      if (!is_identifier(col.name)) {
        throw ParseError("column name '" + name + "." + col.name +
                         "' is not [a-z0-9_]+");
      }
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      if (row.size() != table.schema.size()) {
        throw ParseError("table '" + name + "' row " + std::to_string(r) +
                         " has " + std::to_string(row.size()) +
                         " cells, schema has " +
                         std::to_string(table.schema.size()));
      }
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (!value_matches_kind(row[c], table.schema[c].kind)) {
          throw ParseError("table '" + name + "' row " + std::to_string(r) +
                           " column '" + table.schema[c].name + "': '" +
                           row[c] + "' is not " +
                           std::string(to_string(table.schema[c].kind)));
        }
      }
    }
  }
  for (const auto& j : joins) {
    for (const auto& [t, c] : {std::pair{j.left_table, j.left_column},
                               std::pair{j.right_table, j.right_column}}) {
      const Table& tab = table(t);
      if (!tab.column_index(c)) {
        throw MissingColumn("join key references missing column '" + t + "." +
                            c + "'");
      }
    }
  }
}

}  // namespace ehrqa
