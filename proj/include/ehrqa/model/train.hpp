#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ehrqa/model/transformer.hpp"

namespace ehrqa {

// A tokenized question/query pair.
struct PairIds {
  std::string id;
  std::vector<TokenId> q;
  std::vector<TokenId> y;
};

struct EpochReport {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double lr = 0.0;  // rate at the last step of the epoch
  bool improved = false;
};

struct TrainResult {
  Model model;  // parameters with the lowest validation loss
  int best_epoch = 0;
  double best_valid_loss = 0.0;
  std::vector<EpochReport> epochs;
  std::vector<double> step_losses;
  bool early_stopped = false;
};

// Called after every epoch with the current (not best) parameters; returning
// true stops training.
using EpochCallback = std::function<bool(const EpochReport&, const Model&)>;

// Validation examples: query-side masks drawn from a fixed seed, no input
// masking, so losses are comparable across epochs.
std::vector<Example> validation_examples(const std::vector<PairIds>& pairs,
                                         const TrainConfig& tcfg, int vocab_size, int max_len);

// Adam with linear warmup and linear decay to 0 over the planned steps,
// global-norm gradient clipping and early stopping on validation loss. When
// `valid` is empty the training pairs double as validation pairs. Throws
// EmptyTrainSet or TooLong.
TrainResult train_model(const std::vector<PairIds>& train, const std::vector<PairIds>& valid,
                        const ModelConfig& mcfg, const TrainConfig& tcfg,
                        const EpochCallback& on_epoch = {});

// Learning rate at 0-based `step` of `total_steps`.
double scheduled_lr(const TrainConfig& tcfg, long step, long total_steps);

}  // namespace ehrqa
