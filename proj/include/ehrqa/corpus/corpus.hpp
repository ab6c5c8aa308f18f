#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ehrqa/corpus/database.hpp"

namespace ehrqa {

enum class Split { train, valid, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view s);  // throws ParseError

struct QaPair {
  std::string id;
  std::string question;
  std::string sql;
  std::string sparql;
  Split split = Split::train;

  bool operator==(const QaPair&) const = default;
};

enum class Scale { tiny, small };

Scale parse_scale(std::string_view s);  // throws InvalidArgument
std::string_view to_string(Scale scale);

// Deterministic synthetic clinical database: patients, admissions,
// diagnoses, procedures, prescriptions, lab, and three code dictionaries.
Database generate_database(std::uint64_t seed, Scale scale);

// A slot draws its values from one database column.
struct Slot {
  std::string name;
  std::string table;
  std::string column;
  bool question_only = false;
};

struct Template {
  std::string id;
  std::string question;  // with {slot} placeholders
  std::string sql;
  std::string sparql;
  std::vector<Slot> slots;
};

struct TemplateSet {
  std::vector<Template> templates;

  // Every placeholder resolves to a declared slot and every slot appears in
  // the question and (unless question-only) in both query patterns.
  void validate() const;  // throws InvalidArgument
};

TemplateSet default_templates();

// Instantiates `n` distinct (question, sql) pairs. Every gold query is
// executed against `db` (SQL and SPARQL) before it is accepted.
std::vector<QaPair> generate_pairs(const Database& db,
                                   const TemplateSet& templates, int n,
                                   std::uint64_t seed);

// Deterministic shuffle, then contiguous train/valid/test assignment. Valid
// and test sizes are floor(ratio * N); train takes the remainder.
std::vector<QaPair> split_pairs(std::vector<QaPair> pairs,
                                std::array<double, 3> ratios,
                                std::uint64_t seed);

std::vector<QaPair> select_split(const std::vector<QaPair>& pairs, Split split);

// Line-delimited JSON records with keys id, question, sql, sparql, split.
std::vector<QaPair> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::vector<QaPair>& pairs,
                  const std::filesystem::path& path);
std::vector<QaPair> parse_corpus(std::string_view content);
std::string format_corpus(const std::vector<QaPair>& pairs);

// One `<table>.tsv` per table plus `schema.meta`.
Database read_database(const std::filesystem::path& dir);
void write_database(const Database& db, const std::filesystem::path& dir);

}  // namespace ehrqa
