#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrqa/corpus/corpus.hpp"
#include "ehrqa/engine/query.hpp"

namespace ehrqa {

struct PairScore {
  std::string id;
  std::string prediction;
  std::string recovered;  // equals prediction when recovery is off
  bool lf = false, ex = false, st = false;
  bool lf_recovered = false, ex_recovered = false;
  bool executable = false, executable_recovered = false;
};

struct Accuracies {
  double lf = 0.0, ex = 0.0, st = 0.0;
};

struct EvalReport {
  QueryLanguage language = QueryLanguage::sql;
  bool with_recovery = false;
  std::vector<PairScore> pairs;       // scored pairs only
  std::vector<std::string> gold_unexecutable;  // ids reported, not scored
  Accuracies before, after;
  int unexecutable_before = 0, unexecutable_after = 0;
};

// Scores every prediction against its pair's gold query in `lang`. With
// recovery, lf and ex are also computed on recovered predictions; st is
// recovery-invariant. Asserts the metric laws (throws MetricLawViolation).
// Throws LengthMismatch when the counts differ.
EvalReport evaluate(const QueryTarget& target, QueryLanguage lang,
                    const std::vector<QaPair>& pairs,
                    const std::vector<std::string>& predictions, bool with_recovery);

// Predictions file: one `id<TAB>query` per line.
std::vector<std::pair<std::string, std::string>> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& rows);

// Orders predictions like `pairs`. Throws LengthMismatch when counts differ
// or an id is missing, DuplicateId on repeated ids.
std::vector<std::string> align_predictions(
    const std::vector<QaPair>& pairs,
    const std::vector<std::pair<std::string, std::string>>& predictions);

// Flat machine-readable summary and a human-readable table.
nlohmann::ordered_json report_json(const EvalReport& r);
std::string report_table(const EvalReport& r);

}  // namespace ehrqa
