#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <set>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "ehrqa/corpus/corpus.hpp"
#include "ehrqa/engine/sparql.hpp"
#include "ehrqa/engine/sql.hpp"
#include "ehrqa/engine/triple_store.hpp"

using namespace ehrqa;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ehrqa_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("tiny database has 50 patients and referential integrity") {
  Database db = generate_database(1, Scale::tiny);
  CHECK(db.table("patients").rows.size() == 50);
  std::set<std::string> codes;
  for (const auto& r : db.table("d_icd_diagnoses").rows) codes.insert(r[0]);
  for (const auto& r : db.table("diagnoses").rows) CHECK(codes.count(r[2]) == 1);
  CHECK_NOTHROW(db.validate());
}

TEST_CASE("small database has 500 patients") {
  CHECK(generate_database(3, Scale::small).table("patients").rows.size() == 500);
}

TEST_CASE("database generation is byte-identical for a fixed seed") {
  auto a = scratch_dir("db_a"), b = scratch_dir("db_b");
  write_database(generate_database(1, Scale::tiny), a);
  write_database(generate_database(1, Scale::tiny), b);
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(generate_database(1, Scale::tiny) != generate_database(2, Scale::tiny));
}

TEST_CASE("procedure dictionary includes the long multi-word fixture title") {
  Database db = generate_database(2, Scale::tiny);
  bool found_fixture = false, found_long = false;
  for (const auto& r : db.table("d_icd_procedures").rows) {
    if (r[2] == "other operations on heart and pericardium") found_fixture = true;
    if (text::split_whitespace(r[2]).size() >= 4) found_long = true;
  }
  CHECK(found_fixture);
  CHECK(found_long);
}

TEST_CASE("dictionary titles share multi-word prefixes") {
  Database db = generate_database(1, Scale::tiny);
  for (const char* name : {"d_icd_diagnoses", "d_icd_procedures"}) {
    const auto& rows = db.table(name).rows;
    std::map<std::string, int> prefix_count;
    for (const auto& r : rows) {
      auto w = text::split_whitespace(r[2]);
      REQUIRE(w.size() >= 3);
      prefix_count[w[0] + " " + w[1]]++;
    }
    int sharing = 0;
    for (const auto& r : rows) {
      auto w = text::split_whitespace(r[2]);
      if (prefix_count[w[0] + " " + w[1]] >= 2) ++sharing;
    }
    CHECK(sharing >= 0.2 * static_cast<double>(rows.size()));
  }
}

TEST_CASE("database includes the columns the templates rely on") {
  Database db = generate_database(1, Scale::tiny);
  std::set<std::string> columns;
  for (const auto& [name, t] : db.tables) {
    for (const auto& c : t.schema) columns.insert(c.name);
  }
  for (const char* c : {"subject_id", "hadm_id", "admission_type", "language",
                        "insurance", "marital_status", "name", "drug", "icd9_code",
                        "short_title", "long_title", "expire_flag", "age",
                        "admission_time"}) {
    CHECK_MESSAGE(columns.count(c) == 1, c);
  }
}

TEST_CASE("default templates validate") {
  CHECK_NOTHROW(default_templates().validate());
  TemplateSet bad;
  bad.templates.push_back({"t", "how many {x}?", "select a.b from a", "select ?b where { ?a /b ?b . }",
                           {{"x", "a", "b"}}});
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad.templates[0].slots[0].question_only = true;
  CHECK_NOTHROW(bad.validate());
  bad.templates[0].slots[0].table.clear();
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("drug template produces the figure-style gold query") {
  Database db = generate_database(1, Scale::tiny);
  TemplateSet only_drug;
  for (const auto& t : default_templates().templates) {
    if (t.id == "drug_count") only_drug.templates.push_back(t);
  }
  auto pairs = generate_pairs(db, only_drug, 20, 3);
  bool found = false;
  for (const auto& p : pairs) {
    if (p.question == "how many patients were given the drug ferrous gluconate?") {
      found = true;
      CHECK(p.sql.find("where prescriptions.drug = \"ferrous gluconate\"") !=
            std::string::npos);
      CHECK(p.sql ==
            "select count ( distinct patients.subject_id ) from patients inner "
            "join admissions on patients.subject_id = admissions.subject_id "
            "inner join prescriptions on admissions.hadm_id = "
            "prescriptions.hadm_id where prescriptions.drug = \"ferrous gluconate\"");
    }
  }
  CHECK(found);
}

TEST_CASE("generate_pairs rejects n < 1 and exhausted templates") {
  Database db = generate_database(1, Scale::tiny);
  CHECK_THROWS_AS(generate_pairs(db, default_templates(), 0, 1), InvalidArgument);
  TemplateSet only_code;
  for (const auto& t : default_templates().templates) {
    if (t.id == "procedure_code_title") only_code.templates.push_back(t);
  }
  // One pair per procedure code exists, no more.
  const int codes = static_cast<int>(db.table("d_icd_procedures").rows.size());
  CHECK(generate_pairs(db, only_code, codes, 1).size() == static_cast<std::size_t>(codes));
  CHECK_THROWS_AS(generate_pairs(db, only_code, codes + 1, 1), TemplateExhausted);
}

TEST_CASE("200 generated pairs all execute in both languages") {
  Database db = generate_database(1, Scale::tiny);
  TripleStore store = build_triple_store(db);
  auto pairs = generate_pairs(db, default_templates(), 200, 7);
  REQUIRE(pairs.size() == 200);
  std::set<std::pair<std::string, std::string>> distinct;
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    CHECK_NOTHROW(execute_sql(db, parse_sql(p.sql)));
    CHECK_NOTHROW(execute_sparql(store, parse_sparql(p.sparql)));
    distinct.emplace(p.question, p.sql);
    ids.insert(p.id);
  }
  CHECK(distinct.size() == 200);
  CHECK(ids.size() == 200);
  CHECK(generate_pairs(db, default_templates(), 200, 7) == pairs);
}

TEST_CASE("every table and column token in generated sql exists in the schema") {
  Database db = generate_database(1, Scale::tiny);
  for (const auto& p : generate_pairs(db, default_templates(), 300, 11)) {
    SqlQuery q = parse_sql(p.sql);
    std::vector<ColumnRef> refs;
    for (const auto& s : q.select) refs.push_back(s.column);
    for (const auto& j : q.joins) {
      refs.push_back(j.left);
      refs.push_back(j.right);
    }
    for (const auto& c : q.where) refs.push_back(c.column);
    for (const auto& r : refs) {
      REQUIRE(db.has_table(r.table));
      CHECK(db.table(r.table).column_index(r.column).has_value());
    }
  }
}

TEST_CASE("split sizes are floor based with remainder to train") {
  auto make = [](int n) {
    std::vector<QaPair> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)].id = std::to_string(i);
    return v;
  };
  auto count = [](const std::vector<QaPair>& v, Split s) {
    return std::count_if(v.begin(), v.end(), [&](const QaPair& p) { return p.split == s; });
  };
  auto s1000 = split_pairs(make(1000), {0.8, 0.1, 0.1}, 1);
  CHECK(count(s1000, Split::train) == 800);
  CHECK(count(s1000, Split::valid) == 100);
  CHECK(count(s1000, Split::test) == 100);
  auto s10 = split_pairs(make(10), {0.8, 0.1, 0.1}, 1);
  CHECK(count(s10, Split::train) == 8);
  CHECK(count(s10, Split::valid) == 1);
  CHECK(count(s10, Split::test) == 1);
  auto s7 = split_pairs(make(7), {0.5, 0.25, 0.25}, 1);
  CHECK(count(s7, Split::train) == 5);
  CHECK(split_pairs(make(10), {0.8, 0.1, 0.1}, 9) == split_pairs(make(10), {0.8, 0.1, 0.1}, 9));
  CHECK_THROWS_AS(split_pairs({}, {0.8, 0.1, 0.1}, 1), EmptyInput);
  CHECK_THROWS_AS(split_pairs(make(3), {0.8, 0.1, 0.2}, 1), InvalidArgument);
  CHECK_THROWS_AS(split_pairs(make(3), {1.0, 0.0, 0.0}, 1), InvalidArgument);
}

TEST_CASE("corpus write then read is identity") {
  Database db = generate_database(1, Scale::tiny);
  auto pairs = split_pairs(generate_pairs(db, default_templates(), 50, 2), {0.8, 0.1, 0.1}, 2);
  auto dir = scratch_dir("corpus");
  write_corpus(pairs, dir / "pairs.jsonl");
  CHECK(read_corpus(dir / "pairs.jsonl") == pairs);
}

TEST_CASE("corpus parse errors name the record") {
  const std::string missing_sql =
      "{\"id\":\"a1\",\"question\":\"q\",\"sparql\":\"s\",\"split\":\"train\"}\n";
  try {
    parse_corpus(missing_sql);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("a1") != std::string::npos);
    CHECK(msg.find("sql") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
  }
  const std::string dup =
      "{\"id\":\"a\",\"question\":\"q\",\"sql\":\"x\",\"sparql\":\"s\",\"split\":\"train\"}\n"
      "{\"id\":\"a\",\"question\":\"q\",\"sql\":\"x\",\"sparql\":\"s\",\"split\":\"test\"}\n";
  CHECK_THROWS_AS(parse_corpus(dup), DuplicateId);
  CHECK_THROWS_AS(parse_corpus("not json\n"), ParseError);
  CHECK_THROWS_AS(
      parse_corpus("{\"id\":\"a\",\"question\":\"q\",\"sql\":\"x\",\"sparql\":\"s\",\"split\":\"dev\"}"),
      ParseError);
}

TEST_CASE("database write then read is identity") {
  Database db = generate_database(4, Scale::tiny);
  auto dir = scratch_dir("db_rt");
  write_database(db, dir);
  CHECK(read_database(dir) == db);
}

TEST_CASE("a table header lacking a schema column raises MissingColumn") {
  Database db = generate_database(4, Scale::tiny);
  auto dir = scratch_dir("db_missing");
  write_database(db, dir);
  {
    std::ofstream out(dir / "patients.tsv");
    out << "subject_id\tname\tgender\tdob\n1\ta b\tf\t2050-01-01 00:00:00\n";
  }
  CHECK_THROWS_AS(read_database(dir), MissingColumn);
}

TEST_CASE("cells that do not match their column kind are rejected") {
  Database db = generate_database(4, Scale::tiny);
  db.tables["patients"].rows[0][0] = "abc";
  CHECK_THROWS(db.validate());
}
