#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "ehrqa/corpus/corpus.hpp"

namespace ehrqa {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split_char(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> lines_of(std::string_view content) {
  auto lines = split_char(content, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string format_corpus(const std::vector<QaPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["question"] = p.question;
    j["sql"] = p.sql;
    j["sparql"] = p.sparql;
    j["split"] = std::string(to_string(p.split));
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<QaPair> parse_corpus(std::string_view content) {
  std::vector<QaPair> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& line : lines_of(content)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ParseError(where + ": record is not an object");
    std::string id = "<no id>";
    if (j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
    auto field = [&](const char* key) {
      if (!j.contains(key)) {
        throw ParseError(where + ", record '" + id + "': missing field '" + key + "'");
      }
      if (!j[key].is_string()) {
        throw ParseError(where + ", record '" + id + "': field '" + key +
                         "' is not a string");
      }
      return j[key].get<std::string>();
    };
    QaPair p;
    p.id = field("id");
    p.question = field("question");
    p.sql = field("sql");
    p.sparql = field("sparql");
    try {
      p.split = parse_split(field("split"));
    } catch (const ParseError& e) {
      throw ParseError(where + ", record '" + id + "': " + e.what());
    }
    if (!ids.insert(p.id).second) {
      throw DuplicateId(where + ": duplicate record id '" + p.id + "'");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<QaPair> read_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

void write_corpus(const std::vector<QaPair>& pairs,
                  const std::filesystem::path& path) {
  write_file(path, format_corpus(pairs));
}

void write_database(const Database& db, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string meta;
  for (const auto& [name, table] : db.tables) {
    std::string tsv;
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
      if (c) tsv += '\t';
      tsv += table.schema[c].name;
      meta += name + "." + table.schema[c].name + "\t" +
              std::string(to_string(table.schema[c].kind)) + "\n";
    }
    tsv += '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c].find_first_of("\t\n") != std::string::npos) {
          throw InvalidArgument("cell in " + name + " contains a tab or newline");
        }
        if (c) tsv += '\t';
        tsv += row[c];
      }
      tsv += '\n';
    }
    write_file(dir / (name + ".tsv"), tsv);
  }
  for (const auto& j : db.joins) {
    meta += "join\t" + j.left_table + "." + j.left_column + "=" + j.right_table +
            "." + j.right_column + "\n";
  }
  write_file(dir / "schema.meta", meta);
}

namespace {

std::pair<std::string, std::string> split_qualified(const std::string& s,
                                                    const std::string& where) {
  const auto dot = s.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == s.size()) {
    throw ParseError(where + ": expected table.column, got '" + s + "'");
  }
  return {s.substr(0, dot), s.substr(dot + 1)};
}

}  // namespace

Database read_database(const std::filesystem::path& dir) {
  const auto meta_path = dir / "schema.meta";
  Database db;
  std::size_t line_no = 0;
  for (const auto& line : lines_of(read_file(meta_path))) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = "schema.meta line " + std::to_string(line_no);
    const auto fields = split_char(line, '\t');
    if (fields.size() != 2) throw ParseError(where + ": expected two fields");
    if (fields[0] == "join") {
      const auto eq = fields[1].find('=');
      if (eq == std::string::npos) throw ParseError(where + ": join lacks '='");
      auto [lt, lc] = split_qualified(fields[1].substr(0, eq), where);
      auto [rt, rc] = split_qualified(fields[1].substr(eq + 1), where);
      db.joins.push_back({lt, lc, rt, rc});
      continue;
    }
    auto [table, column] = split_qualified(fields[0], where);
    const auto kind = parse_column_kind(fields[1]);
    if (!kind) throw ParseError(where + ": unknown column kind '" + fields[1] + "'");
    db.tables[table].schema.push_back({column, *kind});
  }

  for (auto& [name, table] : db.tables) {
    const auto path = dir / (name + ".tsv");
    const auto lines = lines_of(read_file(path));
    if (lines.empty()) throw ParseError(name + ".tsv: missing header line");
    const auto header = split_char(lines[0], '\t');
    // Map schema order onto file order; the file may order columns freely.
    std::vector<std::size_t> from_file;
    for (const auto& col : table.schema) {
      auto it = std::find(header.begin(), header.end(), col.name);
      if (it == header.end()) {
        throw MissingColumn(name + ".tsv: header lacks schema column '" +
                            col.name + "'");
      }
      from_file.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    if (header.size() != table.schema.size()) {
      throw ParseError(name + ".tsv: header has " + std::to_string(header.size()) +
                       " columns, schema declares " +
                       std::to_string(table.schema.size()));
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto cells = split_char(lines[i], '\t');
      if (cells.size() != header.size()) {
        throw ParseError(name + ".tsv line " + std::to_string(i + 1) + ": expected " +
                         std::to_string(header.size()) + " fields, got " +
                         std::to_string(cells.size()));
      }
      std::vector<std::string> row;
      row.reserve(cells.size());
      for (std::size_t c : from_file) row.push_back(cells[c]);
      table.rows.push_back(std::move(row));
    }
  }
  db.validate();
  return db;
}

}  // namespace ehrqa
