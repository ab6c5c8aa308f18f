#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "ehrqa/cli/commands.hpp"
#include "ehrqa/cli/run_config.hpp"

using namespace ehrqa;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ehrqa_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig config(const nlohmann::json& values) {
  RunConfig cfg;
  cfg.merge(values);
  cfg.resolve();
  return cfg;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EHRQA_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config rejects unknown keys and mistyped values") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.merge({{"no_such_key", 1}}), UsageError);
  CHECK_THROWS_AS(cfg.set_from_string("epochs", "many"), UsageError);
  CHECK(RunConfig::flag_name("input_masking") == "--input-masking");
  cfg.set_from_string("input_masking", "off");
  CHECK_FALSE(cfg.get<bool>("input_masking"));
}

TEST_CASE("corrupt at moderate hits the calibrated rate band") {
  const fs::path dir = fresh_dir("corrupt");
  const RunConfig cfg = config({{"out", dir.string()}, {"scale", "small"}, {"level", "moderate"}});
  std::ostringstream out;
  cmd_gen_data(cfg, out);
  cmd_corrupt(cfg, out);
  std::ifstream in(dir / "test_moderate.calib.json");
  const auto calib = nlohmann::json::parse(in);
  const double rate = calib["measured_rate"].get<double>();
  CHECK(rate >= 0.095);
  CHECK(rate <= 0.105);
  CHECK(fs::exists(dir / "corrupt.config.json"));
  fs::remove_all(dir);
}

TEST_CASE("rerunning with identical flags gives byte-identical outputs") {
  const fs::path dir = fresh_dir("rerun");
  const RunConfig cfg = config({{"out", dir.string()},
                                {"model_size", "tiny"},
                                {"epochs", 1},
                                {"beam", 2},
                                {"max_out", 12}});
  auto run_all = [&] {
    std::ostringstream out, log;
    cmd_gen_data(cfg, out);
    cmd_build_vocab(cfg, out);
    cmd_corrupt(cfg, out);
    cmd_train(cfg, out, log);
    cmd_decode(cfg, out);
    cmd_evaluate(cfg, out);
  };
  run_all();
  const auto first = snapshot(dir);
  run_all();
  const auto second = snapshot(dir);
  CHECK(first.size() >= 10);
  CHECK(first == second);
  fs::remove_all(dir);
}

TEST_CASE("pipeline on the tiny scale emits the full comparison table") {
  const fs::path dir = fresh_dir("pipeline");
  const RunConfig cfg = config({{"out", dir.string()},
                                {"scale", "tiny"},
                                {"seed", 1},
                                {"model_size", "tiny"},
                                {"epochs", 1},
                                {"beam", 1},
                                {"max_out", 12}});
  std::ostringstream log;
  const PipelineResult r = run_pipeline(cfg, log);
  CHECK(r.models == std::vector<std::string>{"UniQA", "E-as-D"});
  CHECK(r.levels == std::vector<std::string>{"clean", "weak", "moderate", "strong"});
  for (const auto& m : r.models) {
    for (const auto& l : r.levels) {
      const auto& cell = r.cells.at(m).at(l);
      CHECK(cell.before.st >= cell.before.lf);
      CHECK(cell.after.st >= cell.after.lf);
    }
  }
  const std::string table = pipeline_table(r);
  std::istringstream lines(table);
  std::string header, line;
  std::getline(lines, header);
  for (const char* col : {"LF", "LF+rec", "EX", "EX+rec", "ST", "ST+rec"}) {
    CHECK(header.find(col) != std::string::npos);
  }
  int rows = 0;
  while (std::getline(lines, line)) rows += !line.empty();
  CHECK(rows == 8);
  for (const char* f : {"results.json", "results.txt", "run_config.json", "noise.calib",
                        "uniqa/model.bin", "e_as_d/model.bin"}) {
    CHECK(fs::exists(dir / f));
  }
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = fresh_dir("exit");
  CHECK(run_cli("gen-data --out " + dir.string()) == 0);
  CHECK(run_cli("gen-data --no-such-flag 1") == 1);
  CHECK(run_cli("gen-data --epochs many") == 1);
  CHECK(run_cli("build-vocab --corpus " + (dir / "missing.jsonl").string()) == 2);
  CHECK(run_cli("gen-data --scale tiny --pairs 5000 --out " + dir.string()) == 2);
  fs::remove_all(dir);
}
