#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "ehrqa/common/error.hpp"
#include "ehrqa/corpus/corpus.hpp"
#include "ehrqa/engine/query.hpp"
#include "ehrqa/engine/sparql.hpp"
#include "ehrqa/engine/sql.hpp"
#include "ehrqa/engine/triple_store.hpp"
#include "fixture_db.hpp"

using namespace ehrqa;

namespace {

const char* const kFig3Gold =
    "select count ( distinct patients.subject_id ) from patients inner join "
    "admissions on patients.subject_id = admissions.subject_id inner join "
    "prescriptions on admissions.hadm_id = prescriptions.hadm_id where "
    "prescriptions.drug = \"ferrous gluconate\"";

ResultSet rows_of(std::vector<std::vector<std::string>> rows) {
  ResultSet r;
  r.rows = std::move(rows);
  return r;
}

}  // namespace

TEST_CASE("the figure gold query parses with two joins and one condition") {
  SqlQuery q = parse_sql(kFig3Gold);
  CHECK(q.from == "patients");
  CHECK(q.joins.size() == 2);
  REQUIRE(q.where.size() == 1);
  CHECK(q.where[0].column == ColumnRef{"prescriptions", "drug"});
  CHECK(q.where[0].op == CompareOp::eq);
  CHECK(q.where[0].literal.value == "ferrous gluconate");
  CHECK(q.select[0].aggregate == Aggregate::count_distinct);
}

TEST_CASE("keywords are case-insensitive") {
  CHECK(parse_sql("SELECT Patients.Name FROM patients WHERE patients.name = \"A B\"") ==
        parse_sql("select patients.name from patients where patients.name = \"a b\""));
}

TEST_CASE("malformed sql is a syntax error") {
  CHECK_THROWS_AS(parse_sql("select from x"), SyntaxError);
  CHECK_THROWS_AS(parse_sql("select a.b from"), SyntaxError);
  CHECK_THROWS_AS(parse_sql("select a.b from a where"), SyntaxError);
  CHECK_THROWS_AS(parse_sql("select a.b from a where a.c = \"x"), SyntaxError);
  CHECK_THROWS_AS(parse_sql("select a.b from a group by a.b"), SyntaxError);
  CHECK_THROWS_AS(parse_sql("select count ( a.b ) from a"), SyntaxError);
  CHECK_THROWS_AS(parse_sql("select a.b, max ( a.c ) from a"), SyntaxError);
  try {
    parse_sql("select a.b frm a");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 11);
  }
}

TEST_CASE("hand-derived fixture queries") {
  Database db = fixture::clinic();
  db.validate();
  for (const auto& fq : fixture::clinic_queries()) {
    CAPTURE(fq.sql);
    ResultSet got = execute_sql(db, parse_sql(fq.sql));
    CHECK(same_rows(got, rows_of(fq.rows)));
  }
}

TEST_CASE("execution errors") {
  Database db = fixture::clinic();
  CHECK_THROWS_AS(execute_sql(db, parse_sql("select admissions.hadm_id from admissions "
                                            "where admissions.age < \"abc\"")),
                  TypeMismatch);
  CHECK_THROWS_AS(execute_sql(db, parse_sql("select patients.name from patients "
                                            "where patients.name < \"m\"")),
                  TypeMismatch);
  CHECK_THROWS_AS(execute_sql(db, parse_sql("select avg ( patients.name ) from patients")),
                  TypeMismatch);
  CHECK_THROWS_AS(execute_sql(db, parse_sql("select x.y from x")), UnknownTable);
  CHECK_THROWS_AS(execute_sql(db, parse_sql("select patients.nope from patients")),
                  UnknownColumn);
  CHECK_THROWS_AS(execute_sql(db, parse_sql("select admissions.age from patients")),
                  UnknownTable);
}

TEST_CASE("join clause order does not change results") {
  Database db = fixture::clinic();
  const std::string a =
      "select patients.name from patients inner join admissions on "
      "patients.subject_id = admissions.subject_id inner join diagnoses on "
      "admissions.hadm_id = diagnoses.hadm_id inner join d_icd_diagnoses on "
      "diagnoses.icd9_code = d_icd_diagnoses.icd9_code where "
      "d_icd_diagnoses.short_title = \"ess hyp\"";
  const std::string b =
      "select patients.name from patients inner join d_icd_diagnoses on "
      "diagnoses.icd9_code = d_icd_diagnoses.icd9_code inner join diagnoses on "
      "admissions.hadm_id = diagnoses.hadm_id inner join admissions on "
      "patients.subject_id = admissions.subject_id where "
      "d_icd_diagnoses.short_title = \"ess hyp\"";
  ResultSet ra = execute_sql(db, parse_sql(a));
  ResultSet rb = execute_sql(db, parse_sql(b));
  CHECK(same_rows(ra, rb));
  CHECK(same_rows(ra, rows_of({{"ann lee"}, {"bob ray"}})));
}

TEST_CASE("execution leaves the database unchanged") {
  Database db = fixture::clinic();
  const Database before = db;
  for (const auto& fq : fixture::clinic_queries()) execute_sql(db, parse_sql(fq.sql));
  TripleStore store = build_triple_store(db);
  execute_sparql(store, parse_sparql("select ?n where { ?p /name ?n . }"));
  CHECK(db == before);
}

TEST_CASE("triple store: r*c literal triples for a join-free table") {
  Database db;
  db.tables["t"] = {{{"a", ColumnKind::text}, {"b", ColumnKind::integer}},
                    {{"x", "1"}, {"y", "2"}, {"x", "3"}}};
  TripleStore store = build_triple_store(db);
  CHECK(store.triples().size() == 6);
  for (const auto& t : store.triples()) CHECK(store.term(t.object).literal);
}

TEST_CASE("triple store is lossless") {
  Database db = generate_database(5, Scale::tiny);
  TripleStore store = build_triple_store(db);
  // Rebuild every table from literal triples and compare with the source.
  std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> cells;
  for (const auto& t : store.triples()) {
    if (!store.term(t.object).literal) continue;
    const std::string node = store.term(t.subject).value;
    const auto slash = node.rfind('/');
    const std::string table = node.substr(1, slash - 1);
    cells[table][node.substr(slash + 1)][store.term(t.predicate).value.substr(1)] =
        store.term(t.object).value;
  }
  for (const auto& [name, table] : db.tables) {
    REQUIRE(cells[name].size() == table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      auto& row = cells[name][std::to_string(r)];
      for (std::size_t c = 0; c < table.schema.size(); ++c) {
        CHECK(row[table.schema[c].name] == table.rows[r][c]);
      }
    }
  }
}

TEST_CASE("join triples exist exactly where keys match") {
  Database db = fixture::clinic();
  TripleStore store = build_triple_store(db);
  const TermId pred = *store.find_iri("/admissions");
  std::set<std::pair<std::string, std::string>> linked;
  for (std::size_t i : store.with_predicate(pred)) {
    const auto& t = store.triples()[i];
    linked.emplace(store.term(t.subject).value, store.term(t.object).value);
  }
  std::set<std::pair<std::string, std::string>> expected;
  const auto& adm = db.table("admissions");
  for (const char* child : {"diagnoses", "procedures", "prescriptions", "lab"}) {
    const auto& t = db.table(child);
    const auto hc = *t.column_index("hadm_id");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (std::size_t a = 0; a < adm.rows.size(); ++a) {
        if (t.rows[r][hc] == adm.rows[a][0]) {
          expected.emplace("/" + std::string(child) + "/" + std::to_string(r),
                           "/admissions/" + std::to_string(a));
        }
      }
    }
  }
  CHECK(linked == expected);
}

TEST_CASE("single-pattern sparql match") {
  Database db = fixture::clinic();
  TripleStore store = build_triple_store(db);
  ResultSet r = execute_sparql(store, parse_sparql("select ?s where { ?s /name \"ann lee\" . }"));
  CHECK(same_rows(r, rows_of({{"/patients/0"}})));
}

TEST_CASE("sparql syntax and binding errors") {
  CHECK_THROWS_AS(parse_sparql("select ?x where { }"), SyntaxError);
  CHECK_THROWS_AS(parse_sparql("select ?x where { ?x /name \"a\" }"), SyntaxError);
  CHECK_THROWS_AS(parse_sparql("select ?y where { ?x /name \"a\" . }"), UnboundVariable);
  CHECK_THROWS_AS(parse_sparql("select where { ?x /name \"a\" . }"), SyntaxError);
}

TEST_CASE("sparql aggregates mirror sql") {
  Database db = fixture::clinic();
  TripleStore store = build_triple_store(db);
  auto run = [&](const char* q) { return execute_sparql(store, parse_sparql(q)); };
  CHECK(same_rows(run("select count ( distinct ?sid ) where { ?rx /drug \"d1\" . "
                      "?rx /admissions ?adm . ?adm /patients ?p . ?p /subject_id ?sid . }"),
                  rows_of({{"2"}})));
  CHECK(same_rows(run("select avg ( ?age ) where { ?adm /age ?age . }"),
                  rows_of({{"56.5000"}})));
  CHECK(same_rows(run("select max ( ?age ) where { ?adm /language \"english\" . ?adm /age ?age . }"),
                  rows_of({{"80"}})));
  CHECK(same_rows(run("select ?a where { ?adm /age 65 . ?adm /hadm_id ?a . }"),
                  rows_of({{"20"}})));
}

TEST_CASE("sql and sparql agree on every generated gold pair") {
  Database db = generate_database(1, Scale::tiny);
  TripleStore store = build_triple_store(db);
  QueryTarget target{&db, &store};
  for (const auto& p : generate_pairs(db, default_templates(), 400, 3)) {
    CAPTURE(p.sql);
    CAPTURE(p.sparql);
    CHECK(same_rows(run_query(target, QueryLanguage::sql, p.sql),
                    run_query(target, QueryLanguage::sparql, p.sparql)));
  }
}

TEST_CASE("parse, print, parse is a fixed point on gold queries") {
  Database db = generate_database(1, Scale::tiny);
  for (const auto& p : generate_pairs(db, default_templates(), 300, 5)) {
    SqlQuery q = parse_sql(p.sql);
    CHECK(parse_sql(print_sql(q)) == q);
    CHECK(print_sql(q) == p.sql);
    SparqlQuery s = parse_sparql(p.sparql);
    CHECK(parse_sparql(print_sparql(s)) == s);
    CHECK(print_sparql(s) == p.sparql);
  }
}
