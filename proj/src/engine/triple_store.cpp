#include "ehrqa/engine/triple_store.hpp"

#include "ehrqa/common/error.hpp"
#include "ehrqa/engine/result_set.hpp"

namespace ehrqa {

namespace {
const std::vector<std::size_t> kNone;
}

std::optional<TermId> TripleStore::find_iri(std::string_view iri) const {
  auto it = iri_ids_.find(std::string(iri));
  if (it == iri_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<TermId> TripleStore::find_literal(std::string_view value) const {
  auto it = literal_ids_.find(std::string(value));
  if (it == literal_ids_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::size_t>& TripleStore::with_predicate(TermId p) const {
  auto it = by_p_.find(p);
  return it == by_p_.end() ? kNone : it->second;
}

const std::vector<std::size_t>& TripleStore::with_subject_predicate(
    TermId s, TermId p) const {
  auto it = by_sp_.find(pair_key(s, p));
  return it == by_sp_.end() ? kNone : it->second;
}

const std::vector<std::size_t>& TripleStore::with_predicate_object(
    TermId p, TermId o) const {
  auto it = by_po_.find(pair_key(p, o));
  return it == by_po_.end() ? kNone : it->second;
}

TermId TripleStore::intern(std::string_view value, bool literal) {
  auto& ids = literal ? literal_ids_ : iri_ids_;
  auto [it, inserted] =
      ids.emplace(std::string(value), static_cast<TermId>(terms_.size()));
  if (inserted) terms_.push_back(Term{std::string(value), literal});
  return it->second;
}

void TripleStore::add(TermId s, TermId p, TermId o) {
  const std::size_t idx = triples_.size();
  triples_.push_back(Triple{s, p, o});
  by_p_[p].push_back(idx);
  by_sp_[pair_key(s, p)].push_back(idx);
  by_po_[pair_key(p, o)].push_back(idx);
}

TripleStore build_triple_store(const Database& db) {
  TripleStore store;
  std::unordered_map<std::string, std::vector<TermId>> row_nodes;
  for (const auto& [name, table] : db.tables) {
    std::vector<TermId> predicates;
    for (const auto& col : table.schema) {
      predicates.push_back(store.intern("/" + col.name, false));
    }
    auto& nodes = row_nodes[name];
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const TermId subject =
          store.intern("/" + name + "/" + std::to_string(r), false);
      nodes.push_back(subject);
      for (std::size_t c = 0; c < table.schema.size(); ++c) {
        store.add(subject, predicates[c], store.intern(table.rows[r][c], true));
      }
    }
  }
  for (const auto& j : db.joins) {
    const Table& left = db.table(j.left_table);
    const Table& right = db.table(j.right_table);
    const auto lc = left.column_index(j.left_column);
    const auto rc = right.column_index(j.right_column);
    if (!lc || !rc) {
      throw MissingColumn("join key " + j.left_table + "." + j.left_column +
                          "=" + j.right_table + "." + j.right_column +
                          " references a missing column");
    }
    std::unordered_map<std::string, std::vector<std::size_t>> index;
    for (std::size_t r = 0; r < right.rows.size(); ++r) {
      index[value_key(right.rows[r][*rc])].push_back(r);
    }
    const TermId predicate = store.intern("/" + j.right_table, false);
    const auto& lnodes = row_nodes[j.left_table];
    const auto& rnodes = row_nodes[j.right_table];
    for (std::size_t r = 0; r < left.rows.size(); ++r) {
      auto it = index.find(value_key(left.rows[r][*lc]));
      if (it == index.end()) continue;
      for (std::size_t rr : it->second) store.add(lnodes[r], predicate, rnodes[rr]);
    }
  }
  return store;
}

}  // namespace ehrqa
