#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stabdecomp/harness.hpp"

namespace {

const char* kCommands[] = {"analyze", "test", "selfcorrect", "decompose",
                           "learn-extent", "oracle", "bench"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stabilizer structure experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
  std::optional<int> trials;
  std::optional<int> threads;

  for (const char* name : kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out_path, "output file")->required();
    sub->add_option("--format", format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
    sub->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream f(config_path);
    nlohmann::json j = nlohmann::json::parse(f);
    j["command"] = app.get_subcommands().front()->get_name();
    auto config = stabdecomp::config_from_json(j);
    if (seed) config.seed = *seed;
    if (!format.empty()) config.format = format;
    if (trials) config.trials = *trials;
    if (threads) config.threads = *threads;
    config.output = out_path;
    config.validate();

    const auto records = stabdecomp::run(config);
    stabdecomp::emit_results(records, stabdecomp::parse_output_format(config.format), out_path);
    std::cerr << records.size() << " record(s) written to " << out_path << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
