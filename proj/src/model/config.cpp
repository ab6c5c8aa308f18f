#include "ehrqa/model/config.hpp"

#include <cmath>
#include <string>

#include "ehrqa/common/error.hpp"

namespace ehrqa {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.layers = 2;
  c.hidden = 128;
  c.heads = 4;
  c.max_len = 160;
  return c;
}

void ModelConfig::validate() const {
  require(layers >= 1, "layers must be >= 1");
  require(hidden >= 1 && heads >= 1, "hidden and heads must be >= 1");
  require(hidden % heads == 0, "hidden must be divisible by heads");
  require(ffn_mult >= 1, "ffn_mult must be >= 1");
  require(max_len >= 2, "max_len must be >= 2");
  require(vocab_size > 4, "vocab_size must exceed the special tokens");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(init_std > 0.0, "init_std must be positive");
}

void TrainConfig::validate() const {
  require(is_prob(input_mask_prob) && is_prob(target_mask_prob),
          "masking probabilities must lie in [0, 1]");
  require(is_prob(mix_mask) && is_prob(mix_random) && is_prob(mix_keep),
          "replacement mix entries must lie in [0, 1]");
  require(std::abs(mix_mask + mix_random + mix_keep - 1.0) < 1e-9,
          "replacement mix must sum to 1");
  require(lr > 0.0, "lr must be positive");
  require(warmup_frac >= 0.0 && warmup_frac < 1.0, "warmup_frac must lie in [0, 1)");
  require(clip_norm >= 0.0, "clip_norm must be >= 0 (0 disables clipping)");
  require(batch >= 1 && epochs >= 1 && patience >= 1, "batch, epochs, patience must be >= 1");
  require(beam >= 1, "beam must be >= 1");
  require(max_out >= 1, "max_out must be >= 1");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"layers", c.layers},       {"hidden", c.hidden},
                     {"heads", c.heads},         {"ffn_mult", c.ffn_mult},
                     {"max_len", c.max_len},     {"vocab_size", c.vocab_size},
                     {"dropout", c.dropout},     {"init_std", c.init_std}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  read_key(j, "layers", c.layers);
  read_key(j, "hidden", c.hidden);
  read_key(j, "heads", c.heads);
  read_key(j, "ffn_mult", c.ffn_mult);
  read_key(j, "max_len", c.max_len);
  read_key(j, "vocab_size", c.vocab_size);
  read_key(j, "dropout", c.dropout);
  read_key(j, "init_std", c.init_std);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"input_mask_prob", c.input_mask_prob},
                     {"mix_mask", c.mix_mask},
                     {"mix_random", c.mix_random},
                     {"mix_keep", c.mix_keep},
                     {"target_mask_prob", c.target_mask_prob},
                     {"lr", c.lr},
                     {"warmup_frac", c.warmup_frac},
                     {"clip_norm", c.clip_norm},
                     {"batch", c.batch},
                     {"epochs", c.epochs},
                     {"patience", c.patience},
                     {"seed", c.seed},
                     {"beam", c.beam},
                     {"max_out", c.max_out}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  read_key(j, "input_mask_prob", c.input_mask_prob);
  read_key(j, "mix_mask", c.mix_mask);
  read_key(j, "mix_random", c.mix_random);
  read_key(j, "mix_keep", c.mix_keep);
  read_key(j, "target_mask_prob", c.target_mask_prob);
  read_key(j, "lr", c.lr);
  read_key(j, "warmup_frac", c.warmup_frac);
  read_key(j, "clip_norm", c.clip_norm);
  read_key(j, "batch", c.batch);
  read_key(j, "epochs", c.epochs);
  read_key(j, "patience", c.patience);
  read_key(j, "seed", c.seed);
  read_key(j, "beam", c.beam);
  read_key(j, "max_out", c.max_out);
}

}  // namespace ehrqa
