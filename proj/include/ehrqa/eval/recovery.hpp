#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ehrqa/corpus/database.hpp"

namespace ehrqa {

// Distinct canonical cell values of a database, per column and overall.
class ValueIndex {
 public:
  explicit ValueIndex(const Database& db);

  // Values of table.column; null when the column does not exist.
  const std::vector<std::string>* column(std::string_view table, std::string_view column) const;
  // Values of every column with this name; null when no table has it.
  const std::vector<std::string>* named(std::string_view column) const;
  // Every distinct text value in the database.
  const std::vector<std::string>& all_text() const { return all_text_; }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> by_column_;
  std::map<std::string, std::vector<std::string>, std::less<>> by_name_;
  std::vector<std::string> all_text_;
};

struct Recovery {
  std::string query;  // the input unchanged unless a literal was replaced
  bool parsed = false;
  int replaced = 0;
};

// Replaces every non-numeric condition value that does not occur in the
// database by the ROUGE-L closest candidate (ties: smallest string). SQL
// conditions draw candidates from their column; SPARQL literals from every
// column named by the pattern's predicate; unknown columns from all text
// values. Unparseable queries are returned unchanged.
Recovery recover(std::string_view query, const ValueIndex& values);
std::string recover(std::string_view query, const Database& db);

// The candidate chosen for one literal.
std::string closest_value(std::string_view literal, const std::vector<std::string>& candidates);

}  // namespace ehrqa
