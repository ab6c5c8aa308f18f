#include "ehrqa/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "ehrqa/common/text.hpp"
#include "ehrqa/engine/triple_store.hpp"
#include "ehrqa/model/checkpoint.hpp"
#include "ehrqa/model/decode.hpp"
#include "ehrqa/noise/noise.hpp"

namespace ehrqa {

namespace fs = std::filesystem;

namespace {

const std::string& query_of(const QaPair& p, QueryLanguage lang) {
  return lang == QueryLanguage::sql ? p.sql : p.sparql;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << s;
}

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<QaPair> load_split(const RunConfig& cfg, Split split) {
  return select_split(read_corpus(cfg.path("corpus", "corpus.jsonl")), split);
}

struct LoadedDb {
  Database db;
  TripleStore store;
  QueryTarget target() const { return {&db, &store}; }
};

LoadedDb load_db(const RunConfig& cfg) {
  LoadedDb l{read_database(cfg.path("db", "db")), {}};
  l.store = build_triple_store(l.db);
  return l;
}

std::vector<QaPair> generate_corpus(const RunConfig& cfg, const Database& db) {
  const auto seed = cfg.get<std::uint64_t>("seed");
  auto pairs = generate_pairs(db, default_templates(), cfg.get<int>("pairs"), seed);
  return split_pairs(std::move(pairs),
                     {cfg.get<double>("train_ratio"), cfg.get<double>("valid_ratio"),
                      cfg.get<double>("test_ratio")},
                     seed);
}

Vocab build_vocab(const RunConfig& cfg, const std::vector<QaPair>& corpus) {
  return train_vocab(vocab_texts(select_split(corpus, Split::train), cfg.language()),
                     cfg.get<int>("vocab_size"), cfg.get<std::uint64_t>("seed"));
}

fs::path noisy_path(const fs::path& dir, const std::string& split, const std::string& level) {
  return dir / (split + "_" + level + ".jsonl");
}

void save_noisy(const fs::path& path, const NoisySet& set) {
  write_corpus(set.pairs, path);
  write_json(fs::path(path).replace_extension(".calib.json"), set.calibration);
}

// `level<TAB>r_noise` lines, one per level, merged with any existing file.
void update_noise_calib(const fs::path& path, const std::string& level, double r_noise) {
  std::map<std::string, std::string> lines;
  if (std::ifstream in(path); in) {
    for (std::string line; std::getline(in, line);) {
      const auto tab = line.find('\t');
      if (tab != std::string::npos) lines[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", r_noise);
  lines[level] = buf;
  std::string s;
  for (const char* known : {"clean", "weak", "moderate", "strong"}) {
    auto it = lines.find(known);
    if (it == lines.end()) continue;
    s += it->first + "\t" + it->second + "\n";
  }
  write_text(path, s);
}

EvalReport score(const RunConfig& cfg, const QueryTarget& target, const std::vector<QaPair>& pairs,
                 const std::vector<std::pair<std::string, std::string>>& predictions) {
  return evaluate(target, cfg.language(), pairs, align_predictions(pairs, predictions),
                  cfg.get<bool>("recovery"));
}

}  // namespace

std::vector<std::string> vocab_texts(const std::vector<QaPair>& pairs, QueryLanguage lang) {
  std::vector<std::string> texts;
  texts.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    texts.push_back(p.question);
    texts.push_back(query_of(p, lang));
  }
  return texts;
}

std::vector<PairIds> tokenize_pairs(const Vocab& vocab, const std::vector<QaPair>& pairs,
                                    QueryLanguage lang) {
  std::vector<PairIds> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({p.id, encode(vocab, p.question), encode(vocab, query_of(p, lang))});
  }
  return out;
}

NoisySet corrupt_pairs(const std::vector<QaPair>& pairs, const std::string& level,
                       const RunConfig& cfg) {
  NoisySet set{pairs, {}};
  auto& calib = set.calibration;
  calib["level"] = level;
  calib["questions"] = pairs.size();
  calib["l_min"] = cfg.get<int>("l_min");
  calib["noise_seed"] = cfg.get<std::uint64_t>("noise_seed");
  if (level == "clean") {
    calib["target_rate"] = 0.0;
    calib["r_noise"] = 0.0;
    calib["tolerance"] = 0.0;
    calib["measured_rate"] = 0.0;
    return set;
  }
  const double target = target_rate(parse_noise_level(level));
  std::vector<std::string> questions;
  for (const auto& p : pairs) questions.push_back(p.question);
  const int l_min = cfg.get<int>("l_min");
  const auto seed = cfg.get<std::uint64_t>("noise_seed");
  double r = 0.0;
  double tolerance = 0.005;
  if (!cfg.is_null("r_noise")) {
    r = cfg.get<double>("r_noise");
    tolerance = -1.0;
  } else {
    try {
      r = calibrate_r_noise(questions, target, l_min, seed, 1, tolerance);
    } catch (const Unreachable&) {
      // Small sets move the rate in coarse steps.
      tolerance = 0.02;
      r = calibrate_r_noise(questions, target, l_min, seed, 1, tolerance);
    }
  }
  const NoiseConfig ncfg = cfg.noise_config(r);
  long words = 0, corrupted = 0;
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    const auto out = corrupt_question_detailed(set.pairs[i].question, ncfg, i);
    words += static_cast<long>(out.words.size());
    for (TypoKind k : out.kinds) corrupted += k != TypoKind::none;
    set.pairs[i].question = out.text;
  }
  calib["target_rate"] = target;
  calib["r_noise"] = r;
  if (tolerance >= 0) calib["tolerance"] = tolerance;
  else calib["tolerance"] = nullptr;
  calib["words"] = words;
  calib["corrupted_words"] = corrupted;
  calib["measured_rate"] = words > 0 ? corrupted / double(words) : 0.0;
  return set;
}

std::vector<std::pair<std::string, std::string>> predict(const Model& model, const Vocab& vocab,
                                                         const std::vector<QaPair>& pairs,
                                                         int beam, int max_out) {
  const std::size_t limit = static_cast<std::size_t>(model.config().max_len - 2);
  std::vector<std::pair<std::string, std::string>> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto q = encode(vocab, p.question);
    if (q.size() > limit) q.resize(limit);
    const auto ids = decode_beam(model, q, beam, max_out);
    rows.emplace_back(p.id, decode_query(vocab, ids));
  }
  return rows;
}

TrainResult train_and_save(const RunConfig& cfg, const Vocab& vocab,
                           const std::vector<QaPair>& pairs, const fs::path& dir,
                           std::ostream& log) {
  ensure_dir(dir);
  const QueryLanguage lang = cfg.language();
  const auto train = tokenize_pairs(vocab, select_split(pairs, Split::train), lang);
  const auto valid = tokenize_pairs(vocab, select_split(pairs, Split::valid), lang);
  const ModelConfig mcfg = cfg.model_config(static_cast<int>(vocab.size()));
  const TrainConfig tcfg = cfg.train_config();

  std::ofstream train_log(dir / "train_log.jsonl");
  if (!train_log) throw IoError("cannot write " + (dir / "train_log.jsonl").string());
  auto on_epoch = [&](const EpochReport& r, const Model&) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["valid_loss"] = r.valid_loss;
    j["lr"] = r.lr;
    j["improved"] = r.improved;
    train_log << j.dump() << '\n';
    log << "epoch " << r.epoch << " train " << fixed(r.train_loss, 4) << " valid "
        << fixed(r.valid_loss, 4) << (r.improved ? " *" : "") << '\n';
    return false;
  };
  TrainResult result = train_model(train, valid, mcfg, tcfg, on_epoch);

  save_checkpoint(dir / "model.bin", result.model);
  nlohmann::json extra;
  extra["best_epoch"] = result.best_epoch;
  extra["best_valid_loss"] = result.best_valid_loss;
  extra["epochs_run"] = result.epochs.size();
  extra["early_stopped"] = result.early_stopped;
  extra["train_pairs"] = train.size();
  extra["valid_pairs"] = valid.size();
  extra["language"] = std::string(to_string(lang));
  write_model_meta(dir / "model.meta", mcfg, tcfg, extra);
  return result;
}

void cmd_gen_data(const RunConfig& cfg, std::ostream& out) {
  ensure_dir(cfg.out());
  const Database db =
      generate_database(cfg.get<std::uint64_t>("seed"), parse_scale(cfg.get<std::string>("scale")));
  const auto pairs = generate_corpus(cfg, db);
  const fs::path db_dir = cfg.path("db", "db");
  ensure_dir(db_dir);
  write_database(db, db_dir);
  const fs::path corpus = cfg.path("corpus", "corpus.jsonl");
  write_corpus(pairs, corpus);
  cfg.write(cfg.out() / "gen-data.config.json");
  out << "wrote " << pairs.size() << " pairs to " << corpus.string() << " and the database to "
      << db_dir.string() << '\n';
}

void cmd_build_vocab(const RunConfig& cfg, std::ostream& out) {
  ensure_dir(cfg.out());
  const Vocab vocab = build_vocab(cfg, read_corpus(cfg.path("corpus", "corpus.jsonl")));
  const fs::path path = cfg.path("vocab", "vocab.txt");
  vocab.save(path);
  cfg.write(cfg.out() / "build-vocab.config.json");
  out << "wrote " << vocab.size() << " tokens to " << path.string() << '\n';
}

void cmd_corrupt(const RunConfig& cfg, std::ostream& out) {
  ensure_dir(cfg.out());
  const std::string split = cfg.get<std::string>("split");
  const std::string level = cfg.get<std::string>("level");
  const auto set = corrupt_pairs(load_split(cfg, parse_split(split)), level, cfg);
  const fs::path path = noisy_path(cfg.out(), split, level);
  save_noisy(path, set);
  update_noise_calib(cfg.out() / "noise.calib", level, set.calibration["r_noise"].get<double>());
  cfg.write(cfg.out() / "corrupt.config.json");
  out << "measured corruption rate " << fixed(set.calibration["measured_rate"].get<double>(), 4)
      << " (target " << fixed(set.calibration["target_rate"].get<double>(), 2) << ", r_noise "
      << fixed(set.calibration["r_noise"].get<double>(), 6) << ") -> " << path.string() << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const Vocab vocab = Vocab::load(cfg.path("vocab", "vocab.txt"));
  const auto corpus = read_corpus(cfg.path("corpus", "corpus.jsonl"));
  const fs::path model = cfg.path("model", "model.bin");
  const fs::path dir = model.parent_path().empty() ? fs::path(".") : model.parent_path();
  const TrainResult r = train_and_save(cfg, vocab, corpus, dir, log);
  if (model.filename() != "model.bin") fs::rename(dir / "model.bin", model);
  cfg.write(dir / "train.config.json");
  out << "best epoch " << r.best_epoch << " of " << r.epochs.size() << ", validation loss "
      << fixed(r.best_valid_loss, 4) << " -> " << model.string() << '\n';
}

void cmd_decode(const RunConfig& cfg, std::ostream& out) {
  ensure_dir(cfg.out());
  const Vocab vocab = Vocab::load(cfg.path("vocab", "vocab.txt"));
  const Model model = load_checkpoint(cfg.path("model", "model.bin"));
  const auto pairs = load_split(cfg, parse_split(cfg.get<std::string>("split")));
  const auto rows = predict(model, vocab, pairs, cfg.get<int>("beam"), cfg.get<int>("max_out"));
  const fs::path path = cfg.path("predictions", "predictions.tsv");
  write_predictions(path, rows);
  cfg.write(cfg.out() / "decode.config.json");
  out << "wrote " << rows.size() << " predictions to " << path.string() << '\n';
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  ensure_dir(cfg.out());
  const LoadedDb db = load_db(cfg);
  const auto pairs = load_split(cfg, parse_split(cfg.get<std::string>("split")));
  const auto report =
      score(cfg, db.target(), pairs, read_predictions(cfg.path("predictions", "predictions.tsv")));
  write_json(cfg.out() / "report.json", report_json(report));
  cfg.write(cfg.out() / "evaluate.config.json");
  out << report_table(report);
}

PipelineResult run_pipeline(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.out();
  ensure_dir(dir);
  cfg.write(dir / "run_config.json");

  LoadedDb db{generate_database(cfg.get<std::uint64_t>("seed"),
                                parse_scale(cfg.get<std::string>("scale"))),
              {}};
  db.store = build_triple_store(db.db);
  ensure_dir(dir / "db");
  write_database(db.db, dir / "db");
  const auto corpus = generate_corpus(cfg, db.db);
  write_corpus(corpus, dir / "corpus.jsonl");
  const Vocab vocab = build_vocab(cfg, corpus);
  vocab.save(dir / "vocab.txt");
  log << "corpus " << corpus.size() << " pairs, vocabulary " << vocab.size() << " tokens\n";

  PipelineResult result;
  result.levels = cfg.levels();
  const auto test = select_split(corpus, Split::test);
  std::map<std::string, std::vector<QaPair>> sets;
  for (const auto& level : result.levels) {
    const NoisySet set = corrupt_pairs(test, level, cfg);
    if (level != "clean") {
      save_noisy(noisy_path(dir, "test", level), set);
      update_noise_calib(dir / "noise.calib", level, set.calibration["r_noise"].get<double>());
    }
    result.noise_rates[level] = set.calibration["measured_rate"].get<double>();
    sets[level] = set.pairs;
    log << "noise " << level << ": " << fixed(result.noise_rates[level], 4) << '\n';
  }

  const std::vector<std::pair<std::string, bool>> variants = {{"UniQA", true}, {"E-as-D", false}};
  for (const auto& [name, masking] : variants) {
    RunConfig variant = cfg;
    variant.merge({{"input_masking", masking}});
    const fs::path model_dir = dir / (masking ? "uniqa" : "e_as_d");
    log << "training " << name << '\n';
    const TrainResult trained = train_and_save(variant, vocab, corpus, model_dir, log);
    variant.write(model_dir / "train.config.json");
    result.models.push_back(name);
    for (const auto& level : result.levels) {
      const auto rows = predict(trained.model, vocab, sets[level], cfg.get<int>("beam"),
                                cfg.get<int>("max_out"));
      write_predictions(model_dir / ("predictions_" + level + ".tsv"), rows);
      const EvalReport report = score(cfg, db.target(), sets[level], rows);
      write_json(model_dir / ("report_" + level + ".json"), report_json(report));
      result.cells[name][level] = {report.before, report.after, report.unexecutable_before,
                                   report.unexecutable_after};
      log << name << " " << level << ": lf " << fixed(report.before.lf) << "/"
          << fixed(report.after.lf) << " ex " << fixed(report.before.ex) << "/"
          << fixed(report.after.ex) << " st " << fixed(report.before.st) << '\n';
    }
  }
  write_json(dir / "results.json", pipeline_json(result));
  write_text(dir / "results.txt", pipeline_table(result));
  return result;
}

std::string pipeline_table(const PipelineResult& r) {
  std::string s;
  auto cell = [](const std::string& v, std::size_t width) {
    return v + std::string(width > v.size() ? width - v.size() : 1, ' ');
  };
  s += cell("model", 8) + cell("level", 10) + cell("noise", 8) + cell("LF", 7) +
       cell("LF+rec", 8) + cell("EX", 7) + cell("EX+rec", 8) + cell("ST", 7) + "ST+rec\n";
  for (const auto& m : r.models) {
    for (const auto& l : r.levels) {
      const auto& c = r.cells.at(m).at(l);
      s += cell(m, 8) + cell(l, 10) + cell(fixed(r.noise_rates.at(l)), 8) +
           cell(fixed(c.before.lf), 7) + cell(fixed(c.after.lf), 8) + cell(fixed(c.before.ex), 7) +
           cell(fixed(c.after.ex), 8) + cell(fixed(c.before.st), 7) + fixed(c.after.st) + "\n";
    }
  }
  return s;
}

nlohmann::ordered_json pipeline_json(const PipelineResult& r) {
  nlohmann::ordered_json j;
  j["models"] = r.models;
  j["levels"] = r.levels;
  nlohmann::ordered_json rates;
  for (const auto& l : r.levels) rates[l] = r.noise_rates.at(l);
  j["noise_rates"] = rates;
  nlohmann::ordered_json results;
  for (const auto& m : r.models) {
    for (const auto& l : r.levels) {
      const auto& c = r.cells.at(m).at(l);
      nlohmann::ordered_json e;
      e["lf_before"] = c.before.lf;
      e["lf_after"] = c.after.lf;
      e["ex_before"] = c.before.ex;
      e["ex_after"] = c.after.ex;
      e["st_before"] = c.before.st;
      e["st_after"] = c.after.st;
      e["unexecutable_before"] = c.unexecutable_before;
      e["unexecutable_after"] = c.unexecutable_after;
      results[m][l] = e;
    }
  }
  j["results"] = results;
  return j;
}

void cmd_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const PipelineResult r = run_pipeline(cfg, log);
  out << pipeline_table(r);
}

}  // namespace ehrqa
