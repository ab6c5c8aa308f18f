#include "ehrqa/engine/result_set.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"

namespace ehrqa {

bool same_rows(const ResultSet& a, const ResultSet& b) {
  if (a.rows.size() != b.rows.size()) return false;
  auto key_rows = [](const ResultSet& r) {
    std::vector<std::vector<std::string>> keys;
    keys.reserve(r.rows.size());
    for (const auto& row : r.rows) {
      std::vector<std::string> k;
      k.reserve(row.size());
      for (const auto& v : row) k.push_back(value_key(v));
      keys.push_back(std::move(k));
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  return key_rows(a) == key_rows(b);
}

std::string_view to_string(Aggregate agg) {
  switch (agg) {
    case Aggregate::none:
      return "";
    case Aggregate::count_distinct:
      return "count";
    case Aggregate::min:
      return "min";
    case Aggregate::max:
      return "max";
    case Aggregate::avg:
      return "avg";
  }
  return "";
}

bool values_equal(std::string_view a, std::string_view b) {
  const auto na = text::parse_number(a);
  const auto nb = text::parse_number(b);
  if (na && nb) return *na == *nb;
  return a == b;
}

std::string value_key(std::string_view v) {
  // Fast path: a short canonical integer is already its own shortest form.
  if (!v.empty() && v.size() <= 15 && (v[0] != '0' || v.size() == 1) &&
      std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return "#" + std::string(v);
  }
  if (const auto n = text::parse_number(v)) {
    char buf[64];
    buf[0] = '#';
    const auto res = std::to_chars(buf + 1, buf + sizeof buf, *n == 0.0 ? 0.0 : *n);
    return std::string(buf, res.ptr);
  }
  return "'" + std::string(v);
}

std::string aggregate_values(Aggregate agg, std::vector<std::string> values) {
  switch (agg) {
    case Aggregate::none:
      throw InvalidArgument("aggregate_values called without an aggregate");
    case Aggregate::count_distinct: {
      std::set<std::string> distinct;
      for (const auto& v : values) distinct.insert(value_key(v));
      return std::to_string(distinct.size());
    }
    case Aggregate::min:
    case Aggregate::max: {
      if (values.empty()) return "";
      bool numeric = true;
      for (const auto& v : values) {
        if (!text::parse_number(v)) {
          numeric = false;
          break;
        }
      }
      auto less = [numeric](const std::string& a, const std::string& b) {
        if (numeric) return *text::parse_number(a) < *text::parse_number(b);
        return a < b;
      };
      // Ties resolve to the lexicographically smallest lexical form so the
      // result does not depend on row order.
      std::sort(values.begin(), values.end());
      const auto it = agg == Aggregate::min
                          ? std::min_element(values.begin(), values.end(), less)
                          : std::max_element(values.begin(), values.end(),
                                             [&](const auto& a, const auto& b) {
                                               return less(a, b);
                                             });
      return *it;
    }
    case Aggregate::avg: {
      if (values.empty()) return "";
      std::vector<double> nums;
      nums.reserve(values.size());
      for (const auto& v : values) {
        const auto n = text::parse_number(v);
        if (!n) throw TypeMismatch("avg over non-numeric value '" + v + "'");
        nums.push_back(*n);
      }
      std::sort(nums.begin(), nums.end());
      double sum = 0.0;
      for (double x : nums) sum += x;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f",
                    sum / static_cast<double>(nums.size()));
      return buf;
    }
  }
  return "";
}

}  // namespace ehrqa
