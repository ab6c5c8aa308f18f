#include "ehrqa/cli/run_config.hpp"

#include <fstream>

#include "ehrqa/common/text.hpp"
#include "ehrqa/tokenizer/vocab.hpp"

namespace ehrqa {

namespace {

nlohmann::ordered_json make_defaults() {
  const TrainConfig t;
  nlohmann::ordered_json d;
  d["out"] = "run";
  d["scale"] = "tiny";
  d["seed"] = 1;
  d["pairs"] = nullptr;
  d["train_ratio"] = 0.8;
  d["valid_ratio"] = 0.1;
  d["test_ratio"] = 0.1;
  d["language"] = "sql";
  d["vocab_size"] = 800;
  d["model_size"] = "desk";
  d["layers"] = nullptr;
  d["hidden"] = nullptr;
  d["heads"] = nullptr;
  d["ffn_mult"] = nullptr;
  d["max_len"] = nullptr;
  d["dropout"] = nullptr;
  d["init_std"] = nullptr;
  d["input_masking"] = true;
  d["input_mask_prob"] = t.input_mask_prob;
  d["mix_mask"] = t.mix_mask;
  d["mix_random"] = t.mix_random;
  d["mix_keep"] = t.mix_keep;
  d["target_mask_prob"] = t.target_mask_prob;
  d["lr"] = t.lr;
  d["warmup_frac"] = t.warmup_frac;
  d["clip_norm"] = t.clip_norm;
  d["batch"] = t.batch;
  d["epochs"] = t.epochs;
  d["patience"] = t.patience;
  d["beam"] = t.beam;
  d["max_out"] = t.max_out;
  d["level"] = "moderate";
  d["levels"] = "clean,weak,moderate,strong";
  d["r_noise"] = nullptr;
  d["l_min"] = 3;
  d["noise_seed"] = nullptr;
  d["recovery"] = true;
  d["split"] = "test";
  d["corpus"] = "";
  d["db"] = "";
  d["vocab"] = "";
  d["model"] = "";
  d["predictions"] = "";
  return d;
}

enum class Kind { integer, real, boolean, string };

Kind kind_of(const std::string& key) {
  static const std::map<std::string, Kind> kinds = [] {
    std::map<std::string, Kind> k;
    for (const auto& [key, v] : RunConfig::defaults().items()) {
      if (v.is_boolean()) k[key] = Kind::boolean;
      else if (v.is_string()) k[key] = Kind::string;
      else if (v.is_number_float()) k[key] = Kind::real;
      else k[key] = Kind::integer;
    }
    for (const char* real : {"dropout", "init_std", "r_noise"}) k[real] = Kind::real;
    return k;
  }();
  auto it = kinds.find(key);
  if (it == kinds.end()) throw UsageError("unknown configuration key '" + key + "'");
  return it->second;
}

nlohmann::json coerce(const std::string& key, const nlohmann::json& v) {
  if (v.is_null()) return v;
  switch (kind_of(key)) {
    case Kind::boolean:
      if (v.is_boolean()) return v;
      break;
    case Kind::string:
      if (v.is_string()) return v;
      break;
    case Kind::real:
      if (v.is_number()) return v.get<double>();
      break;
    case Kind::integer:
      if (v.is_number_integer() || v.is_number_unsigned()) return v;
      if (v.is_number_float() && v.get<double>() == static_cast<double>(v.get<long long>())) {
        return v.get<long long>();
      }
      break;
  }
  throw UsageError("configuration key '" + key + "' has a value of the wrong type: " + v.dump());
}

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

}  // namespace

const nlohmann::ordered_json& RunConfig::defaults() {
  static const nlohmann::ordered_json d = make_defaults();
  return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

std::string RunConfig::flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return f;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError(path.string() + ": config must be a flat JSON object");
  merge(j);
}

void RunConfig::merge(const nlohmann::json& values) {
  for (const auto& [key, v] : values.items()) {
    if (v.is_object() || v.is_array()) throw UsageError("configuration key '" + key + "' must be flat");
    values_[key] = coerce(key, v);
  }
}

void RunConfig::set_from_string(const std::string& key, const std::string& value) {
  const Kind k = kind_of(key);
  try {
    switch (k) {
      case Kind::boolean: {
        const std::string v = text::to_lower(value);
        if (v == "on" || v == "true" || v == "1" || v == "yes") values_[key] = true;
        else if (v == "off" || v == "false" || v == "0" || v == "no") values_[key] = false;
        else throw UsageError(flag_name(key) + " expects on/off, got '" + value + "'");
        return;
      }
      case Kind::string:
        values_[key] = value;
        return;
      case Kind::real: {
        std::size_t used = 0;
        const double d = std::stod(value, &used);
        if (used != value.size()) break;
        values_[key] = d;
        return;
      }
      case Kind::integer: {
        std::size_t used = 0;
        const long long n = std::stoll(value, &used);
        if (used != value.size()) break;
        values_[key] = n;
        return;
      }
    }
  } catch (const std::logic_error&) {
  }
  throw UsageError(flag_name(key) + ": cannot read '" + value + "'");
}

void RunConfig::resolve() {
  const std::string size = get<std::string>("model_size");
  require(size == "desk" || size == "tiny", "model_size must be desk or tiny");
  ModelConfig preset = size == "tiny" ? ModelConfig::tiny() : ModelConfig{};
  auto fill = [&](const char* key, const nlohmann::json& v) {
    if (values_[key].is_null()) values_[key] = v;
  };
  fill("layers", preset.layers);
  fill("hidden", preset.hidden);
  fill("heads", preset.heads);
  fill("ffn_mult", preset.ffn_mult);
  fill("max_len", preset.max_len);
  fill("dropout", preset.dropout);
  fill("init_std", preset.init_std);
  fill("noise_seed", values_["seed"]);
  const std::string scale = get<std::string>("scale");
  require(scale == "tiny" || scale == "small", "scale must be tiny or small");
  fill("pairs", scale == "tiny" ? 300 : 1000);
  require(get<long long>("pairs") >= 1, "pairs must be >= 1");
  require(get<long long>("vocab_size") > kNumSpecial, "vocab_size too small");
  require(get<long long>("l_min") >= 0, "l_min must be >= 0");
  require(get<long long>("seed") >= 0 && get<long long>("noise_seed") >= 0, "seeds must be >= 0");
  language();
  levels();
  const std::string level = get<std::string>("level");
  try {
    if (level != "clean") parse_noise_level(level);
    model_config(kNumSpecial + 1).validate();
    train_config().validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

std::filesystem::path RunConfig::path(const std::string& key, const std::string& fallback) const {
  const std::string p = get<std::string>(key);
  return p.empty() ? out() / fallback : std::filesystem::path(p);
}

ModelConfig RunConfig::model_config(int vocab_size) const {
  ModelConfig c;
  c.layers = get<int>("layers");
  c.hidden = get<int>("hidden");
  c.heads = get<int>("heads");
  c.ffn_mult = get<int>("ffn_mult");
  c.max_len = get<int>("max_len");
  c.dropout = get<double>("dropout");
  c.init_std = get<double>("init_std");
  c.vocab_size = vocab_size;
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.input_mask_prob = get<bool>("input_masking") ? get<double>("input_mask_prob") : 0.0;
  t.mix_mask = get<double>("mix_mask");
  t.mix_random = get<double>("mix_random");
  t.mix_keep = get<double>("mix_keep");
  t.target_mask_prob = get<double>("target_mask_prob");
  t.lr = get<double>("lr");
  t.warmup_frac = get<double>("warmup_frac");
  t.clip_norm = get<double>("clip_norm");
  t.batch = get<int>("batch");
  t.epochs = get<int>("epochs");
  t.patience = get<int>("patience");
  t.seed = get<std::uint64_t>("seed");
  t.beam = get<int>("beam");
  t.max_out = get<int>("max_out");
  return t;
}

NoiseConfig RunConfig::noise_config(double r_noise) const {
  NoiseConfig n;
  n.r_noise = r_noise;
  n.l_min = get<int>("l_min");
  n.seed = get<std::uint64_t>("noise_seed");
  return n;
}

QueryLanguage RunConfig::language() const {
  try {
    return parse_query_language(get<std::string>("language"));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::string> RunConfig::levels() const {
  std::vector<std::string> out;
  std::string cur;
  for (char c : get<std::string>("levels") + ",") {
    if (c != ',') {
      cur += c;
      continue;
    }
    cur = text::trim(cur);
    if (cur.empty()) continue;
    if (cur != "clean") {
      try {
        parse_noise_level(cur);
      } catch (const InvalidArgument&) {
        throw UsageError("unknown noise level '" + cur + "'");
      }
    }
    out.push_back(cur);
    cur.clear();
  }
  require(!out.empty(), "levels must name at least one level");
  return out;
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << values_.dump(2) << '\n';
}

}  // namespace ehrqa
