#pragma once

#include <string_view>

#include "ehrqa/corpus/database.hpp"
#include "ehrqa/engine/result_set.hpp"
#include "ehrqa/engine/triple_store.hpp"

namespace ehrqa {

enum class QueryLanguage { sql, sparql };

std::string_view to_string(QueryLanguage lang);
QueryLanguage parse_query_language(std::string_view s);  // throws InvalidArgument

// A database together with its triple-store view, so either query language
// can be executed against the same data.
struct QueryTarget {
  const Database* db = nullptr;
  const TripleStore* store = nullptr;
};

// Parses and executes `text`. Throws the parser's or executor's error.
ResultSet run_query(const QueryTarget& target, QueryLanguage lang,
                    std::string_view text);

}  // namespace ehrqa
