#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ehrqa {

enum class ColumnKind { text, integer, real, datetime };

std::string_view to_string(ColumnKind kind);
std::optional<ColumnKind> parse_column_kind(std::string_view s);

// Whether `value` is a valid lexical form for `kind`.
bool value_matches_kind(std::string_view value, ColumnKind kind);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::text;

  bool operator==(const Column&) const = default;
};

// Cells are stored in their lexical form; the schema kind says how to read
// them. All synthetic data is NULL-free.
struct Table {
  std::vector<Column> schema;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  bool operator==(const Table&) const = default;
};

// Declared foreign-key style equality `left_table.left_column =
// right_table.right_column`. The left row points at the right row.
struct JoinKey {
  std::string left_table;
  std::string left_column;
  std::string right_table;
  std::string right_column;

  bool operator==(const JoinKey&) const = default;
};

struct Database {
  std::map<std::string, Table> tables;
  std::vector<JoinKey> joins;

  const Table& table(std::string_view name) const;  // throws UnknownTable
  bool has_table(std::string_view name) const;

  // Checks the schema invariants: identifier shape, row arity, cell kinds
  // and join-key references. Throws ParseError/MissingColumn/UnknownTable.
  void validate() const;

  bool operator==(const Database&) const = default;
};

// Lowercase `[a-z0-9_]+`.
bool is_identifier(std::string_view s);

}  // namespace ehrqa
