#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrqa/cli/run_config.hpp"
#include "ehrqa/corpus/corpus.hpp"
#include "ehrqa/eval/evaluate.hpp"
#include "ehrqa/model/train.hpp"
#include "ehrqa/tokenizer/vocab.hpp"

namespace ehrqa {

// Question/query texts the vocabulary is trained on: questions and queries
// in `lang` of the given pairs.
std::vector<std::string> vocab_texts(const std::vector<QaPair>& pairs, QueryLanguage lang);

std::vector<PairIds> tokenize_pairs(const Vocab& vocab, const std::vector<QaPair>& pairs,
                                    QueryLanguage lang);

// Pairs whose questions were corrupted at `level` ("clean" leaves them
// untouched). Question k uses noise stream k. Unless r_noise is configured,
// it is calibrated on exactly these questions; `calibration` records the
// setting and the measured rate.
struct NoisySet {
  std::vector<QaPair> pairs;
  nlohmann::ordered_json calibration;
};
NoisySet corrupt_pairs(const std::vector<QaPair>& pairs, const std::string& level,
                       const RunConfig& cfg);

// Beam-decodes every question; returns (id, query text) rows.
std::vector<std::pair<std::string, std::string>> predict(const Model& model, const Vocab& vocab,
                                                         const std::vector<QaPair>& pairs,
                                                         int beam, int max_out);

// Trains one model and writes model.bin, model.meta and train_log.jsonl
// into `dir`.
TrainResult train_and_save(const RunConfig& cfg, const Vocab& vocab,
                           const std::vector<QaPair>& pairs, const std::filesystem::path& dir,
                           std::ostream& log);

struct PipelineCell {
  Accuracies before, after;
  int unexecutable_before = 0, unexecutable_after = 0;
};

struct PipelineResult {
  std::vector<std::string> models;  // "UniQA" (input masking), "E-as-D"
  std::vector<std::string> levels;
  std::map<std::string, std::map<std::string, PipelineCell>> cells;  // model -> level
  std::map<std::string, double> noise_rates;                          // level -> measured
};

// gen-data, build-vocab, both trainings, decoding at every noise level and
// evaluation before/after recovery, all under cfg.out().
PipelineResult run_pipeline(const RunConfig& cfg, std::ostream& log);
std::string pipeline_table(const PipelineResult& r);
nlohmann::ordered_json pipeline_json(const PipelineResult& r);

// Subcommands. Each reads and writes files under the configured paths and
// writes its resolved configuration beside its outputs.
void cmd_gen_data(const RunConfig& cfg, std::ostream& out);
void cmd_build_vocab(const RunConfig& cfg, std::ostream& out);
void cmd_corrupt(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& log);
void cmd_decode(const RunConfig& cfg, std::ostream& out);
void cmd_evaluate(const RunConfig& cfg, std::ostream& out);
void cmd_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& log);

}  // namespace ehrqa
