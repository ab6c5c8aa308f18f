#include "ehrqa/eval/evaluate.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "ehrqa/common/error.hpp"
#include "ehrqa/eval/metrics.hpp"
#include "ehrqa/eval/recovery.hpp"

namespace ehrqa {

namespace {

void law(bool holds, const std::string& what) {
  if (!holds) throw MetricLawViolation(what);
}

bool executes(const QueryTarget& target, QueryLanguage lang, const std::string& q) {
  try {
    run_query(target, lang, q);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

EvalReport evaluate(const QueryTarget& target, QueryLanguage lang,
                    const std::vector<QaPair>& pairs,
                    const std::vector<std::string>& predictions, bool with_recovery) {
  if (pairs.size() != predictions.size()) {
    throw LengthMismatch(std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(pairs.size()) + " pairs");
  }
  EvalReport r;
  r.language = lang;
  r.with_recovery = with_recovery;
  std::optional<ValueIndex> values;
  if (with_recovery) values.emplace(*target.db);

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string& gold = lang == QueryLanguage::sql ? pairs[i].sql : pairs[i].sparql;
    const std::string& pred = predictions[i];
    PairScore s;
    s.id = pairs[i].id;
    s.prediction = pred;
    try {
      s.ex = acc_ex(target, lang, pred, gold);
    } catch (const GoldUnexecutable&) {
      r.gold_unexecutable.push_back(s.id);
      continue;
    }
    s.lf = acc_lf(pred, gold);
    s.st = acc_st(pred, gold);
    s.executable = executes(target, lang, pred);
    s.recovered = pred;
    if (with_recovery) {
      s.recovered = recover(pred, *values).query;
      law(recover(s.recovered, *values).query == s.recovered,
          "recovery is not idempotent on pair '" + s.id + "'");
      law(acc_st(s.recovered, gold) == s.st, "recovery changed Acc_ST on pair '" + s.id + "'");
      s.lf_recovered = acc_lf(s.recovered, gold);
      s.ex_recovered = acc_ex(target, lang, s.recovered, gold);
      s.executable_recovered = executes(target, lang, s.recovered);
    } else {
      s.lf_recovered = s.lf;
      s.ex_recovered = s.ex;
      s.executable_recovered = s.executable;
    }
    law(!s.lf || s.st, "Acc_LF without Acc_ST on pair '" + s.id + "'");
    law(!s.lf || s.ex, "Acc_LF without Acc_EX on pair '" + s.id + "'");
    law(!s.lf_recovered || s.ex_recovered,
        "Acc_LF without Acc_EX after recovery on pair '" + s.id + "'");
    r.pairs.push_back(std::move(s));
  }

  long lf = 0, ex = 0, st = 0, lf2 = 0, ex2 = 0;
  for (const auto& s : r.pairs) {
    lf += s.lf;
    ex += s.ex;
    st += s.st;
    lf2 += s.lf_recovered;
    ex2 += s.ex_recovered;
    r.unexecutable_before += !s.executable;
    r.unexecutable_after += !s.executable_recovered;
  }
  const double n = static_cast<double>(r.pairs.size());
  if (n > 0) {
    r.before = {lf / n, ex / n, st / n};
    r.after = {lf2 / n, ex2 / n, st / n};
  }
  law(r.before.st >= r.before.lf && r.after.st >= r.after.lf,
      "corpus Acc_ST below Acc_LF");
  return r;
}

std::vector<std::pair<std::string, std::string>> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": missing tab");
    }
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [id, q] : rows) out << id << '\t' << q << '\n';
}

std::vector<std::string> align_predictions(
    const std::vector<QaPair>& pairs,
    const std::vector<std::pair<std::string, std::string>>& predictions) {
  if (pairs.size() != predictions.size()) {
    throw LengthMismatch(std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(pairs.size()) + " pairs");
  }
  std::map<std::string, std::string> by_id;
  for (const auto& [id, q] : predictions) {
    if (!by_id.emplace(id, q).second) throw DuplicateId("prediction id '" + id + "' repeated");
  }
  std::vector<std::string> out;
  for (const auto& p : pairs) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw LengthMismatch("no prediction for pair '" + p.id + "'");
    out.push_back(it->second);
  }
  return out;
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["language"] = std::string(to_string(r.language));
  j["recovery"] = r.with_recovery;
  j["pairs"] = r.pairs.size();
  j["gold_unexecutable"] = r.gold_unexecutable.size();
  j["acc_lf_before"] = r.before.lf;
  j["acc_ex_before"] = r.before.ex;
  j["acc_st"] = r.before.st;
  j["acc_lf_after"] = r.after.lf;
  j["acc_ex_after"] = r.after.ex;
  j["unexecutable_before"] = r.unexecutable_before;
  j["unexecutable_after"] = r.unexecutable_after;
  return j;
}

std::string report_table(const EvalReport& r) {
  char buf[256];
  std::ostringstream out;
  out << "pairs: " << r.pairs.size() << " (" << to_string(r.language) << ")";
  if (!r.gold_unexecutable.empty()) out << ", gold unexecutable: " << r.gold_unexecutable.size();
  out << "\n";
  std::snprintf(buf, sizeof buf, "%-18s %8s %8s %8s %14s\n", "", "Acc_LF", "Acc_EX", "Acc_ST",
                "unexecutable");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-18s %8.3f %8.3f %8.3f %14d\n", "before recovery", r.before.lf,
                r.before.ex, r.before.st, r.unexecutable_before);
  out << buf;
  if (r.with_recovery) {
    std::snprintf(buf, sizeof buf, "%-18s %8.3f %8.3f %8.3f %14d\n", "after recovery",
                  r.after.lf, r.after.ex, r.after.st, r.unexecutable_after);
    out << buf;
  }
  return out.str();
}

}  // namespace ehrqa
