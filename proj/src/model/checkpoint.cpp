#include "ehrqa/model/checkpoint.hpp"

#include <fstream>
#include <string>

#include "ehrqa/common/error.hpp"

namespace ehrqa {

namespace {

constexpr const char* kTag = "ehrqa-checkpoint 1";

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& p = model.params();
  out << kTag << '\n' << nlohmann::json(model.config()).dump() << '\n' << p.size() << '\n';
  out.write(reinterpret_cast<const char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string tag, cfg_line, count_line;
  std::getline(in, tag);
  if (tag != kTag) throw ParseError(path.string() + ": not a checkpoint (header '" + tag + "')");
  std::getline(in, cfg_line);
  std::getline(in, count_line);
  ModelConfig cfg;
  try {
    cfg = nlohmann::json::parse(cfg_line).get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": bad config line: " + e.what());
  }
  Model model(cfg);
  auto& p = model.params();
  std::size_t count = 0;
  try {
    count = std::stoull(count_line);
  } catch (const std::exception&) {
    throw ParseError(path.string() + ": bad parameter count '" + count_line + "'");
  }
  if (count != p.size()) {
    throw ParseError(path.string() + ": " + std::to_string(count) + " parameters, config needs " +
                     std::to_string(p.size()));
  }
  in.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
    throw ParseError(path.string() + ": truncated parameter block");
  }
  return model;
}

void write_model_meta(const std::filesystem::path& path, const ModelConfig& mcfg,
                      const TrainConfig& tcfg, const nlohmann::json& extra) {
  nlohmann::ordered_json j;
  j["model"] = nlohmann::json(mcfg);
  j["train"] = nlohmann::json(tcfg);
  j["seeds"] = {{"init", tcfg.seed},
                {"train_stream", mix_seed(tcfg.seed, 0x7)},
                {"validation_masks", mix_seed(tcfg.seed, 0x7a11d)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace ehrqa
