#include "ehrqa/engine/query.hpp"

#include "ehrqa/common/error.hpp"
#include "ehrqa/engine/sparql.hpp"
#include "ehrqa/engine/sql.hpp"

namespace ehrqa {

std::string_view to_string(QueryLanguage lang) {
  return lang == QueryLanguage::sql ? "sql" : "sparql";
}

QueryLanguage parse_query_language(std::string_view s) {
  if (s == "sql") return QueryLanguage::sql;
  if (s == "sparql") return QueryLanguage::sparql;
  throw InvalidArgument("unknown query language '" + std::string(s) +
                        "' (expected sql or sparql)");
}

ResultSet run_query(const QueryTarget& target, QueryLanguage lang,
                    std::string_view text) {
  if (lang == QueryLanguage::sql) {
    if (!target.db) throw InvalidArgument("no database to run SQL against");
    return execute_sql(*target.db, parse_sql(text));
  }
  if (!target.store) throw InvalidArgument("no triple store to run SPARQL against");
  return execute_sparql(*target.store, parse_sparql(text));
}

}  // namespace ehrqa
