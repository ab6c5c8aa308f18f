#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ehrqa/corpus/database.hpp"

namespace ehrqa {

using TermId = std::uint32_t;

struct Term {
  std::string value;
  bool literal = false;
};

struct Triple {
  TermId subject = 0;
  TermId predicate = 0;
  TermId object = 0;
};

// Knowledge-graph view of a Database. Row r of table t becomes node
// `/t/r`; every cell yields (node, `/column`, literal) and every declared join
// key yields (left row, `/right_table`, right row) for each matching pair.
class TripleStore {
 public:
  TripleStore() = default;

  const std::vector<Triple>& triples() const { return triples_; }
  const Term& term(TermId id) const { return terms_[id]; }
  std::size_t term_count() const { return terms_.size(); }

  std::optional<TermId> find_iri(std::string_view iri) const;
  std::optional<TermId> find_literal(std::string_view value) const;

  // Triple indices matching the bound positions.
  const std::vector<std::size_t>& with_predicate(TermId p) const;
  const std::vector<std::size_t>& with_subject_predicate(TermId s, TermId p) const;
  const std::vector<std::size_t>& with_predicate_object(TermId p, TermId o) const;

  // Mutators used by build_triple_store.
  TermId intern(std::string_view value, bool literal);
  void add(TermId s, TermId p, TermId o);

 private:
  static std::uint64_t pair_key(TermId a, TermId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  std::vector<Term> terms_;
  std::unordered_map<std::string, TermId> iri_ids_;
  std::unordered_map<std::string, TermId> literal_ids_;
  std::vector<Triple> triples_;
  std::unordered_map<TermId, std::vector<std::size_t>> by_p_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_sp_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_po_;
};

TripleStore build_triple_store(const Database& db);

}  // namespace ehrqa
