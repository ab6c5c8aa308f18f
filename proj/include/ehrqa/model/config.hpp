#pragma once

#include <cstdint>

#include <json.hpp>

namespace ehrqa {

struct ModelConfig {
  int layers = 4;
  int hidden = 128;
  int heads = 4;
  int ffn_mult = 4;
  int max_len = 192;
  int vocab_size = 0;
  double dropout = 0.1;
  double init_std = 0.02;

  // Two layers of width 64; trains in seconds per epoch on a laptop CPU.
  static ModelConfig tiny();

  int head_dim() const { return hidden / heads; }
  int ffn() const { return hidden * ffn_mult; }
  void validate() const;  // throws InvalidArgument
  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  double input_mask_prob = 0.2;
  double mix_mask = 0.8;
  double mix_random = 0.1;
  double mix_keep = 0.1;
  double target_mask_prob = 0.3;
  double lr = 3e-3;
  double warmup_frac = 0.05;
  double clip_norm = 1.0;
  int batch = 8;
  int epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;
  int beam = 5;
  int max_out = 128;

  void validate() const;  // throws InvalidArgument
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace ehrqa
