#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ehrqa {

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Multiset equality of rows; column names and row order are ignored.
bool same_rows(const ResultSet& a, const ResultSet& b);

enum class Aggregate { none, count_distinct, min, max, avg };

std::string_view to_string(Aggregate agg);

// Equality used by conditions, joins and triple matching: numeric when both
// sides parse as numbers, exact string equality otherwise.
bool values_equal(std::string_view a, std::string_view b);

// Hash/dedup key consistent with values_equal.
std::string value_key(std::string_view v);

// Aggregate over a column of values. MIN/MAX compare numerically when every
// value is numeric, lexicographically otherwise; the empty aggregate is "".
// AVG requires numeric values (TypeMismatch otherwise).
std::string aggregate_values(Aggregate agg, std::vector<std::string> values);

}  // namespace ehrqa
