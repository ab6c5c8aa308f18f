#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrqa/common/error.hpp"
#include "ehrqa/engine/query.hpp"
#include "ehrqa/model/config.hpp"
#include "ehrqa/noise/noise.hpp"

namespace ehrqa {

// Bad flags, unknown configuration keys or values of the wrong type.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error("UsageError", message) {}
};

// Flat key/value configuration shared by every subcommand. Keys are
// snake_case; the command line spells them --kebab-case. Later sources
// override earlier ones: defaults, then a JSON file, then flags.
class RunConfig {
 public:
  RunConfig();

  static const nlohmann::ordered_json& defaults();
  static std::string flag_name(const std::string& key);  // layers -> --layers

  // Throws UsageError on unknown keys or mistyped values.
  void merge_file(const std::filesystem::path& path);
  void merge(const nlohmann::json& values);
  void set_from_string(const std::string& key, const std::string& value);

  // Fills keys left null (model shape from model_size, noise_seed from seed,
  // pairs from scale) and checks ranges. Throws UsageError.
  void resolve();

  const nlohmann::ordered_json& values() const { return values_; }
  template <typename T>
  T get(const std::string& key) const {
    return values_.at(key).get<T>();
  }
  bool is_null(const std::string& key) const { return values_.at(key).is_null(); }

  std::filesystem::path out() const { return get<std::string>("out"); }
  // Path-valued key, defaulting to `fallback` inside the output directory.
  std::filesystem::path path(const std::string& key, const std::string& fallback) const;

  ModelConfig model_config(int vocab_size) const;
  TrainConfig train_config() const;
  NoiseConfig noise_config(double r_noise) const;
  QueryLanguage language() const;
  std::vector<std::string> levels() const;

  void write(const std::filesystem::path& path) const;

 private:
  nlohmann::ordered_json values_;
};

}  // namespace ehrqa
