#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/rng.hpp"
#include "ehrqa/common/text.hpp"
#include "ehrqa/corpus/corpus.hpp"
#include "ehrqa/engine/sparql.hpp"
#include "ehrqa/engine/sql.hpp"
#include "ehrqa/engine/triple_store.hpp"
#include "word_lists.hpp"

namespace ehrqa {

namespace {

struct ScaleParams {
  int patients;
  int diagnosis_titles;
  int procedure_titles;
  int drugs;
  int max_admissions;
};

ScaleParams params_for(Scale scale) {
  switch (scale) {
    case Scale::tiny:
      return {50, 40, 30, 30, 2};
    case Scale::small:
      return {500, 90, 70, 40, 3};
  }
  return {50, 40, 30, 30, 2};
}

template <typename Array>
std::string pick(Rng& rng, const Array& values) {
  return std::string(values[rng.below(values.size())]);
}

std::string two_digits(long long v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02lld", v);
  return buf;
}

std::string random_datetime(Rng& rng, int year_lo, int year_hi) {
  const long long year = rng.between(year_lo, year_hi);
  const long long month = rng.between(1, 12);
  const long long day = rng.between(1, 28);
  const long long hour = rng.between(0, 23);
  const long long minute = rng.between(0, 3) * 15;
  return std::to_string(year) + "-" + two_digits(month) + "-" +
         two_digits(day) + " " + two_digits(hour) + ":" + two_digits(minute) +
         ":00";
}

struct Title {
  std::string short_title;
  std::string long_title;
};

// Stem x site product, shuffled; `forced` (if any) is moved to the front.
template <typename Stems, typename Sites>
std::vector<Title> compose_titles(Rng& rng, const Stems& stems,
                                  const Sites& sites, int count,
                                  std::string_view forced) {
  std::vector<Title> all;
  for (const auto& stem : stems) {
    for (const auto& site : sites) {
      all.push_back({std::string(stem.abbreviated) + " " +
                         std::string(site.abbreviated),
                     std::string(stem.full) + " " + std::string(site.full)});
    }
  }
  rng.shuffle(all.begin(), all.end());
  if (!forced.empty()) {
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const Title& t) { return t.long_title == forced; });
    if (it != all.end()) std::iter_swap(all.begin(), it);
  }
  all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(count)));
  return all;
}

std::vector<std::string> unique_codes(Rng& rng, int count, int lo, int hi) {
  std::set<long long> seen;
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < count) {
    const long long code = rng.between(lo, hi);
    if (seen.insert(code).second) out.push_back(std::to_string(code));
  }
  return out;
}

Table make_table(std::initializer_list<Column> columns) {
  Table t;
  t.schema.assign(columns.begin(), columns.end());
  return t;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::valid:
      return "valid";
    case Split::test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "valid") return Split::valid;
  if (s == "test") return Split::test;
  throw ParseError("unknown split '" + std::string(s) + "'");
}

Scale parse_scale(std::string_view s) {
  if (s == "tiny") return Scale::tiny;
  if (s == "small") return Scale::small;
  throw InvalidArgument("unknown scale '" + std::string(s) +
                        "' (expected tiny or small)");
}

std::string_view to_string(Scale scale) {
  return scale == Scale::tiny ? "tiny" : "small";
}

Database generate_database(std::uint64_t seed, Scale scale) {
  const ScaleParams sp = params_for(scale);
  Rng rng(mix_seed(seed, 0xdb));
  using K = ColumnKind;

  Table patients = make_table({{"subject_id", K::integer},
                               {"name", K::text},
                               {"gender", K::text},
                               {"dob", K::datetime},
                               {"expire_flag", K::integer}});
  Table admissions = make_table({{"hadm_id", K::integer},
                                 {"subject_id", K::integer},
                                 {"admission_type", K::text},
                                 {"insurance", K::text},
                                 {"language", K::text},
                                 {"marital_status", K::text},
                                 {"ethnicity", K::text},
                                 {"age", K::integer},
                                 {"admission_time", K::datetime},
                                 {"days_stay", K::integer}});
  Table diagnoses = make_table(
      {{"subject_id", K::integer}, {"hadm_id", K::integer}, {"icd9_code", K::text}});
  Table procedures = make_table(
      {{"subject_id", K::integer}, {"hadm_id", K::integer}, {"icd9_code", K::text}});
  Table prescriptions = make_table({{"subject_id", K::integer},
                                    {"hadm_id", K::integer},
                                    {"drug", K::text},
                                    {"drug_type", K::text},
                                    {"route", K::text}});
  Table lab = make_table({{"subject_id", K::integer},
                          {"hadm_id", K::integer},
                          {"itemid", K::integer},
                          {"charttime", K::datetime},
                          {"value_num", K::real},
                          {"flag", K::text}});
  Table d_diag = make_table(
      {{"icd9_code", K::text}, {"short_title", K::text}, {"long_title", K::text}});
  Table d_proc = make_table(
      {{"icd9_code", K::text}, {"short_title", K::text}, {"long_title", K::text}});
  Table d_lab = make_table({{"itemid", K::integer},
                            {"label", K::text},
                            {"fluid", K::text},
                            {"category", K::text}});

  // Dictionaries. Diagnosis and procedure codes live in disjoint ranges.
  const auto diag_titles = compose_titles(rng, words::kDiagnosisStems,
                                          words::kDiagnosisSites,
                                          sp.diagnosis_titles, "");
  const auto diag_codes = unique_codes(rng, static_cast<int>(diag_titles.size()), 2000, 8999);
  for (std::size_t i = 0; i < diag_titles.size(); ++i) {
    d_diag.rows.push_back({diag_codes[i], diag_titles[i].short_title,
                           diag_titles[i].long_title});
  }
  const auto proc_titles = compose_titles(
      rng, words::kProcedureStems, words::kProcedureSites, sp.procedure_titles,
      "other operations on heart and pericardium");
  const auto proc_codes = unique_codes(rng, static_cast<int>(proc_titles.size()), 100, 999);
  for (std::size_t i = 0; i < proc_titles.size(); ++i) {
    d_proc.rows.push_back({proc_codes[i], proc_titles[i].short_title,
                           proc_titles[i].long_title});
  }
  std::vector<std::string> lab_ids;
  for (std::size_t i = 0; i < words::kLabItems.size(); ++i) {
    const auto& item = words::kLabItems[i];
    lab_ids.push_back(std::to_string(50800 + 3 * i));
    d_lab.rows.push_back({lab_ids.back(), std::string(item.label),
                          std::string(item.fluid), std::string(item.category)});
  }

  std::vector<std::string> drugs(words::kDrugs.begin() + 2, words::kDrugs.end());
  rng.shuffle(drugs.begin(), drugs.end());
  drugs.resize(static_cast<std::size_t>(sp.drugs - 2));
  drugs.insert(drugs.begin(), {"ferrous gluconate", "ferrous sulfate"});

  // Patients with unique two-token names; "cynthia gomez" is always present.
  std::vector<std::string> names;
  for (auto first : words::kFirstNames) {
    for (auto last : words::kLastNames) {
      names.push_back(std::string(first) + " " + std::string(last));
    }
  }
  rng.shuffle(names.begin(), names.end());
  names.resize(static_cast<std::size_t>(sp.patients));
  if (std::find(names.begin(), names.end(), "cynthia gomez") == names.end()) {
    names[rng.below(names.size())] = "cynthia gomez";
  }

  long long next_hadm = 100001;
  std::set<std::string> used_times;
  for (int p = 0; p < sp.patients; ++p) {
    const std::string subject_id = std::to_string(10001 + p);
    const std::string language = pick(rng, words::kLanguages);
    const std::string marital = pick(rng, words::kMaritalStatus);
    const std::string insurance = pick(rng, words::kInsurance);
    const std::string ethnicity = pick(rng, words::kEthnicity);
    const long long base_age = rng.between(18, 89);
    patients.rows.push_back({subject_id, names[static_cast<std::size_t>(p)],
                             rng.bernoulli(0.5) ? "f" : "m",
                             random_datetime(rng, 2020, 2090),
                             rng.bernoulli(0.3) ? "1" : "0"});

    const long long n_adm = rng.between(1, sp.max_admissions);
    for (long long a = 0; a < n_adm; ++a) {
      const std::string hadm_id = std::to_string(next_hadm++);
      std::string when;
      do {
        when = random_datetime(rng, 2100, 2199);
      } while (!used_times.insert(when).second);
      admissions.rows.push_back(
          {hadm_id, subject_id, pick(rng, words::kAdmissionTypes), insurance,
           language, marital, ethnicity, std::to_string(base_age + a), when,
           std::to_string(rng.between(1, 30))});

      std::set<std::size_t> chosen;
      const long long n_diag = rng.between(1, 4);
      while (static_cast<long long>(chosen.size()) < n_diag) {
        chosen.insert(rng.below(d_diag.rows.size()));
      }
      for (std::size_t d : chosen) {
        diagnoses.rows.push_back({subject_id, hadm_id, d_diag.rows[d][0]});
      }
      chosen.clear();
      const long long n_proc = rng.between(0, 2);
      while (static_cast<long long>(chosen.size()) < n_proc) {
        chosen.insert(rng.below(d_proc.rows.size()));
      }
      for (std::size_t d : chosen) {
        procedures.rows.push_back({subject_id, hadm_id, d_proc.rows[d][0]});
      }
      chosen.clear();
      const long long n_rx = rng.between(1, 4);
      while (static_cast<long long>(chosen.size()) < n_rx) {
        chosen.insert(rng.below(drugs.size()));
      }
      for (std::size_t d : chosen) {
        prescriptions.rows.push_back({subject_id, hadm_id, drugs[d],
                                      pick(rng, words::kDrugTypes),
                                      pick(rng, words::kRoutes)});
      }
      const long long n_lab = rng.between(1, 3);
      for (long long l = 0; l < n_lab; ++l) {
        char value[32];
        std::snprintf(value, sizeof value, "%.1f",
                      static_cast<double>(rng.between(1, 2000)) / 10.0);
        lab.rows.push_back({subject_id, hadm_id, lab_ids[rng.below(lab_ids.size())],
                            random_datetime(rng, 2100, 2199), value,
                            pick(rng, words::kLabFlags)});
      }
    }
  }

  Database db;
  db.tables.emplace("patients", std::move(patients));
  db.tables.emplace("admissions", std::move(admissions));
  db.tables.emplace("diagnoses", std::move(diagnoses));
  db.tables.emplace("procedures", std::move(procedures));
  db.tables.emplace("prescriptions", std::move(prescriptions));
  db.tables.emplace("lab", std::move(lab));
  db.tables.emplace("d_icd_diagnoses", std::move(d_diag));
  db.tables.emplace("d_icd_procedures", std::move(d_proc));
  db.tables.emplace("d_labitems", std::move(d_lab));
  db.joins = {
      {"admissions", "subject_id", "patients", "subject_id"},
      {"diagnoses", "hadm_id", "admissions", "hadm_id"},
      {"procedures", "hadm_id", "admissions", "hadm_id"},
      {"prescriptions", "hadm_id", "admissions", "hadm_id"},
      {"lab", "hadm_id", "admissions", "hadm_id"},
      {"diagnoses", "icd9_code", "d_icd_diagnoses", "icd9_code"},
      {"procedures", "icd9_code", "d_icd_procedures", "icd9_code"},
      {"lab", "itemid", "d_labitems", "itemid"},
  };
  db.validate();
  return db;
}

// --- templates -------------------------------------------------------------

namespace {

const char* const kPatientJoin =
    "from patients inner join admissions on patients.subject_id = "
    "admissions.subject_id";

std::string count_patients_sql(const std::string& joins, const std::string& where) {
  return std::string("select count ( distinct patients.subject_id ) ") +
         kPatientJoin + joins + " where " + where;
}

std::string count_patients_sparql(const std::string& patterns) {
  return "select count ( distinct ?subject_id ) where { ?adm /patients ?pat . " +
         patterns + " ?pat /subject_id ?subject_id . }";
}

Template attribute_by_name(std::string id, std::string question,
                           const std::string& column) {
  Template t;
  t.id = std::move(id);
  t.question = std::move(question);
  t.sql = "select admissions." + column +
          " from admissions inner join patients on admissions.subject_id = "
          "patients.subject_id where patients.name = \"{name}\"";
  t.sparql = "select ?" + column +
             " where { ?adm /patients ?pat . ?pat /name \"{name}\" . ?adm /" +
             column + " ?" + column + " . }";
  t.slots = {{"name", "patients", "name"}};
  return t;
}

}  // namespace

TemplateSet default_templates() {
  const std::string rx_join =
      " inner join prescriptions on admissions.hadm_id = prescriptions.hadm_id";
  const std::string proc_join =
      " inner join procedures on admissions.hadm_id = procedures.hadm_id"
      " inner join d_icd_procedures on procedures.icd9_code = "
      "d_icd_procedures.icd9_code";
  const std::string diag_join =
      " inner join diagnoses on admissions.hadm_id = diagnoses.hadm_id"
      " inner join d_icd_diagnoses on diagnoses.icd9_code = "
      "d_icd_diagnoses.icd9_code";
  const std::string lab_join =
      " inner join lab on admissions.hadm_id = lab.hadm_id"
      " inner join d_labitems on lab.itemid = d_labitems.itemid";

  TemplateSet set;
  auto& ts = set.templates;

  ts.push_back({"drug_count", "how many patients were given the drug {drug}?",
                count_patients_sql(rx_join, "prescriptions.drug = \"{drug}\""),
                count_patients_sparql(
                    "?rx /admissions ?adm . ?rx /drug \"{drug}\" ."),
                {{"drug", "prescriptions", "drug"}}});
  ts.push_back(attribute_by_name("language_of",
                                 "which language does {name} understand?",
                                 "language"));
  ts.push_back(attribute_by_name("insurance_of",
                                 "what is the insurance type of {name}?",
                                 "insurance"));
  ts.push_back(attribute_by_name("marital_of",
                                 "what is the marital status of {name}?",
                                 "marital_status"));
  ts.push_back(attribute_by_name("age_of", "what is the age of {name}?", "age"));
  ts.push_back(attribute_by_name("admission_time_of",
                                 "when was {name} admitted to the hospital?",
                                 "admission_time"));
  ts.push_back(
      {"type_procedure_count",
       "how many patients with {admission_type} admission type had the "
       "procedure titled {procedure}?",
       count_patients_sql(proc_join,
                          "admissions.admission_type = \"{admission_type}\" and "
                          "d_icd_procedures.long_title = \"{procedure}\""),
       count_patients_sparql(
           "?proc /admissions ?adm . ?proc /d_icd_procedures ?dproc . ?adm "
           "/admission_type \"{admission_type}\" . ?dproc /long_title "
           "\"{procedure}\" ."),
       {{"admission_type", "admissions", "admission_type"},
        {"procedure", "d_icd_procedures", "long_title"}}});
  ts.push_back(
      {"diagnosis_short_count",
       "how many patients are diagnosed with {diagnosis}?",
       count_patients_sql(diag_join,
                          "d_icd_diagnoses.short_title = \"{diagnosis}\""),
       count_patients_sparql(
           "?dx /admissions ?adm . ?dx /d_icd_diagnoses ?ddx . ?ddx "
           "/short_title \"{diagnosis}\" ."),
       {{"diagnosis", "d_icd_diagnoses", "short_title"}}});
  ts.push_back(
      {"insurance_diagnosis_count",
       "how many patients with {insurance} insurance have the diagnosis "
       "{diagnosis}?",
       count_patients_sql(diag_join,
                          "admissions.insurance = \"{insurance}\" and "
                          "d_icd_diagnoses.long_title = \"{diagnosis}\""),
       count_patients_sparql(
           "?dx /admissions ?adm . ?dx /d_icd_diagnoses ?ddx . ?adm /insurance "
           "\"{insurance}\" . ?ddx /long_title \"{diagnosis}\" ."),
       {{"insurance", "admissions", "insurance"},
        {"diagnosis", "d_icd_diagnoses", "long_title"}}});
  ts.push_back(
      {"max_age_by_type",
       "what is the maximum age of patients with {admission_type} admission "
       "type?",
       "select max ( admissions.age ) from admissions where "
       "admissions.admission_type = \"{admission_type}\"",
       "select max ( ?age ) where { ?adm /admission_type \"{admission_type}\" . "
       "?adm /age ?age . }",
       {{"admission_type", "admissions", "admission_type"}}});
  ts.push_back(
      {"min_age_by_language",
       "what is the minimum age of patients whose language is {language}?",
       "select min ( admissions.age ) from admissions where admissions.language "
       "= \"{language}\"",
       "select min ( ?age ) where { ?adm /language \"{language}\" . ?adm /age "
       "?age . }",
       {{"language", "admissions", "language"}}});
  ts.push_back(
      {"avg_age_by_marital",
       "what is the average age of patients whose marital status is {marital}?",
       "select avg ( admissions.age ) from admissions where "
       "admissions.marital_status = \"{marital}\"",
       "select avg ( ?age ) where { ?adm /marital_status \"{marital}\" . ?adm "
       "/age ?age . }",
       {{"marital", "admissions", "marital_status"}}});
  ts.push_back(
      {"died_by_marital",
       "how many {marital} patients have died?",
       count_patients_sql("",
                          "admissions.marital_status = \"{marital}\" and "
                          "patients.expire_flag = \"1\""),
       count_patients_sparql("?adm /marital_status \"{marital}\" . ?pat "
                             "/expire_flag \"1\" ."),
       {{"marital", "admissions", "marital_status"}}});
  ts.push_back(
      {"admitted_at_count",
       "how many patients were admitted at {time}?",
       count_patients_sql("", "admissions.admission_time = \"{time}\""),
       count_patients_sparql("?adm /admission_time \"{time}\" ."),
       {{"time", "admissions", "admission_time"}}});
  ts.push_back(
      {"drugs_of",
       "list all drugs prescribed to {name}.",
       "select prescriptions.drug from prescriptions inner join admissions on "
       "prescriptions.hadm_id = admissions.hadm_id inner join patients on "
       "admissions.subject_id = patients.subject_id where patients.name = "
       "\"{name}\"",
       "select ?drug where { ?rx /admissions ?adm . ?adm /patients ?pat . ?pat "
       "/name \"{name}\" . ?rx /drug ?drug . }",
       {{"name", "patients", "name"}}});
  ts.push_back(
      {"procedure_code_title",
       "what is the short title of procedure code {code}?",
       "select d_icd_procedures.short_title from d_icd_procedures where "
       "d_icd_procedures.icd9_code = \"{code}\"",
       "select ?short_title where { ?dproc /icd9_code \"{code}\" . ?dproc "
       "/short_title ?short_title . }",
       {{"code", "d_icd_procedures", "icd9_code"}}});
  ts.push_back(
      {"age_lab_count",
       "how many patients aged {age} had a {lab} lab test?",
       count_patients_sql(lab_join,
                          "admissions.age = \"{age}\" and d_labitems.label = "
                          "\"{lab}\""),
       count_patients_sparql(
           "?lr /admissions ?adm . ?lr /d_labitems ?item . ?adm /age \"{age}\" "
           ". ?item /label \"{lab}\" ."),
       {{"age", "admissions", "age"}, {"lab", "d_labitems", "label"}}});
  ts.push_back(
      {"diagnosis_long_title",
       "what is the full title of the diagnosis {diagnosis}?",
       "select d_icd_diagnoses.long_title from d_icd_diagnoses where "
       "d_icd_diagnoses.short_title = \"{diagnosis}\"",
       "select ?long_title where { ?ddx /short_title \"{diagnosis}\" . ?ddx "
       "/long_title ?long_title . }",
       {{"diagnosis", "d_icd_diagnoses", "short_title"}}});
  return set;
}

void TemplateSet::validate() const {
  std::set<std::string> ids;
  for (const auto& t : templates) {
    if (!ids.insert(t.id).second) {
      throw InvalidArgument("duplicate template id '" + t.id + "'");
    }
    std::set<std::string> declared;
    for (const auto& s : t.slots) {
      if (s.table.empty() || s.column.empty()) {
        throw InvalidArgument("template '" + t.id + "' slot '" + s.name +
                              "' has no value domain");
      }
      declared.insert(s.name);
      const std::string ph = "{" + s.name + "}";
      if (t.question.find(ph) == std::string::npos) {
        throw InvalidArgument("template '" + t.id + "' question lacks " + ph);
      }
      if (!s.question_only && (t.sql.find(ph) == std::string::npos ||
                               t.sparql.find(ph) == std::string::npos)) {
        throw InvalidArgument("template '" + t.id + "' query patterns lack " + ph);
      }
    }
    for (const std::string* pattern : {&t.question, &t.sql, &t.sparql}) {
      std::size_t pos = 0;
      while ((pos = pattern->find('{', pos)) != std::string::npos) {
        const std::size_t end = pattern->find('}', pos);
        // SPARQL group braces are surrounded by spaces; placeholders are not.
        if (end == std::string::npos) break;
        const std::string name = pattern->substr(pos + 1, end - pos - 1);
        if (!name.empty() && name.find(' ') == std::string::npos &&
            !declared.count(name)) {
          throw InvalidArgument("template '" + t.id + "' uses undeclared slot {" +
                                name + "}");
        }
        pos = end + 1;
      }
    }
  }
}

namespace {

std::string substitute(std::string pattern,
                       const std::map<std::string, std::string>& values) {
  for (const auto& [name, value] : values) {
    const std::string ph = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = pattern.find(ph, pos)) != std::string::npos) {
      pattern.replace(pos, ph.size(), value);
      pos += value.size();
    }
  }
  return pattern;
}

std::string canonical_query(const std::string& s) {
  const auto words = text::canonical_words(s);
  return text::render_tokens(words);
}

}  // namespace

std::vector<QaPair> generate_pairs(const Database& db,
                                   const TemplateSet& templates, int n,
                                   std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("generate_pairs requires n >= 1");
  templates.validate();
  if (templates.templates.empty()) throw TemplateExhausted("empty template set");

  // Distinct values per slot domain, sorted for determinism.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> domains;
  double capacity = 0.0;
  for (const auto& t : templates.templates) {
    double combos = 1.0;
    for (const auto& s : t.slots) {
      auto key = std::pair{s.table, s.column};
      if (!domains.count(key)) {
        const Table& table = db.table(s.table);
        const auto col = table.column_index(s.column);
        if (!col) {
          throw UnknownColumn("slot domain " + s.table + "." + s.column +
                              " is not in the database");
        }
        std::set<std::string> distinct;
        for (const auto& row : table.rows) distinct.insert(row[*col]);
        domains[key] = {distinct.begin(), distinct.end()};
      }
      combos *= static_cast<double>(domains[key].size());
    }
    capacity += combos;
  }
  if (capacity < n) {
    throw TemplateExhausted("templates can produce at most " +
                            std::to_string(static_cast<long long>(capacity)) +
                            " distinct pairs, " + std::to_string(n) + " requested");
  }

  const TripleStore store = build_triple_store(db);
  Rng rng(mix_seed(seed, 0x9a1));
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<QaPair> out;
  const long long max_attempts = 200LL * n + 10000;
  for (long long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < n;
       ++attempt) {
    const Template& t = templates.templates[rng.below(templates.templates.size())];
    std::map<std::string, std::string> values;
    for (const auto& s : t.slots) {
      const auto& domain = domains[{s.table, s.column}];
      if (domain.empty()) break;
      values[s.name] = domain[rng.below(domain.size())];
    }
    if (values.size() != t.slots.size()) continue;
    QaPair pair;
    pair.question = text::to_lower(substitute(t.question, values));
    pair.sql = canonical_query(substitute(t.sql, values));
    if (!seen.emplace(pair.question, pair.sql).second) continue;
    pair.sparql = canonical_query(substitute(t.sparql, values));
    // Gold queries must run; a failure here is a template defect.
    execute_sql(db, parse_sql(pair.sql));
    execute_sparql(store, parse_sparql(pair.sparql));
    char id[32];
    std::snprintf(id, sizeof id, "q%05zu", out.size());
    pair.id = id;
    out.push_back(std::move(pair));
  }
  if (static_cast<int>(out.size()) < n) {
    throw TemplateExhausted("only " + std::to_string(out.size()) +
                            " distinct pairs found, " + std::to_string(n) +
                            " requested");
  }
  return out;
}

std::vector<QaPair> split_pairs(std::vector<QaPair> pairs,
                                std::array<double, 3> ratios,
                                std::uint64_t seed) {
  if (pairs.empty()) throw EmptyInput("split_pairs: no pairs");
  for (double r : ratios) {
    if (!(r > 0.0)) throw InvalidArgument("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1");
  }
  Rng rng(mix_seed(seed, 0x5b17));
  rng.shuffle(pairs.begin(), pairs.end());
  const std::size_t n = pairs.size();
  // The epsilon keeps e.g. 0.1 * 10 from flooring to 0.
  const auto n_valid = static_cast<std::size_t>(std::floor(ratios[1] * n + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios[2] * n + 1e-9));
  const std::size_t n_train = n - n_valid - n_test;
  for (std::size_t i = 0; i < n; ++i) {
    pairs[i].split = i < n_train             ? Split::train
                     : i < n_train + n_valid ? Split::valid
                                             : Split::test;
  }
  return pairs;
}

std::vector<QaPair> select_split(const std::vector<QaPair>& pairs, Split split) {
  std::vector<QaPair> out;
  for (const auto& p : pairs) {
    if (p.split == split) out.push_back(p);
  }
  return out;
}

}  // namespace ehrqa
