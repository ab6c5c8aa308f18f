#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehrqa/cli/commands.hpp"
#include "ehrqa/cli/run_config.hpp"
#include "ehrqa/common/heap.hpp"

namespace {

struct Subcommand {
  std::string name;
  std::string help;
  void (*run)(const ehrqa::RunConfig&);
};

void emit_error(const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cout << j.dump() << std::endl;
  std::cerr << "ehrqa: " << kind << ": " << message << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ehrqa;
  retain_heap();
  const std::vector<Subcommand> commands = {
      {"gen-data", "Generate the synthetic database and question/query corpus",
       [](const RunConfig& c) { cmd_gen_data(c, std::cout); }},
      {"build-vocab", "Train the subword vocabulary on the training split",
       [](const RunConfig& c) { cmd_build_vocab(c, std::cout); }},
      {"corrupt", "Write a typo-corrupted copy of one split at a noise level",
       [](const RunConfig& c) { cmd_corrupt(c, std::cout); }},
      {"train", "Train a model (--input-masking on|off)",
       [](const RunConfig& c) { cmd_train(c, std::cout, std::cerr); }},
      {"decode", "Beam-decode the questions of one split",
       [](const RunConfig& c) { cmd_decode(c, std::cout); }},
      {"evaluate", "Score predictions before and after condition-value recovery",
       [](const RunConfig& c) { cmd_evaluate(c, std::cout); }},
      {"pipeline", "Run every step and compare training with and without input masking",
       [](const RunConfig& c) { cmd_pipeline(c, std::cout, std::cerr); }},
  };

  CLI::App app{"Typo-robust question-to-query workbench"};
  app.require_subcommand(1);
  std::string config_file;
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_file, "JSON file of configuration keys");
    for (const auto& [key, value] : RunConfig::defaults().items()) {
      const std::string shown = value.is_null() ? "derived" : value.dump();
      sub->add_option(RunConfig::flag_name(key), flags[key], "default " + shown);
    }
    subs[cmd.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("UsageError", e.what());
    return 1;
  }

  try {
    for (const auto& cmd : commands) {
      CLI::App* sub = subs[cmd.name];
      if (!sub->parsed()) continue;
      RunConfig cfg;
      if (!config_file.empty()) cfg.merge_file(config_file);
      for (const auto& [key, value] : RunConfig::defaults().items()) {
        if (sub->count(RunConfig::flag_name(key)) > 0) cfg.set_from_string(key, flags[key]);
      }
      cfg.resolve();
      cmd.run(cfg);
    }
  } catch (const UsageError& e) {
    emit_error(e.kind(), e.what());
    return 1;
  } catch (const Error& e) {
    emit_error(e.kind(), e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("InternalError", e.what());
    return 3;
  }
  return 0;
}
