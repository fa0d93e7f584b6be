// Command-line front end: rsma_sim run --config <path> [--seed N] [--drops N] [--out <path>] [--workers N]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "rsma/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rate-splitting / SDMA / NOMA downlink simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> drops;
  std::optional<std::string> out;
  std::optional<unsigned> workers;

  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiment described by a configuration file");
  run_cmd->add_option("--config", config_path, "key = value configuration file")->required();
  run_cmd->add_option("--seed", seed, "Override the master seed");
  run_cmd->add_option("--drops", drops, "Override n_drops");
  run_cmd->add_option("--out", out, "Override output_path");
  run_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    std::ifstream is(config_path);
    if (!is) {
      throw rsma::IoError("cannot read config '" + config_path + "'");
    }
    std::stringstream text;
    text << is.rdbuf();

    std::map<std::string, std::string> overrides;
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (drops) overrides["n_drops"] = std::to_string(*drops);
    if (out) overrides["output_path"] = *out;
    if (workers) overrides["workers"] = std::to_string(*workers);

    const rsma::SimConfig cfg = rsma::parse_config(text.str(), overrides);
    const rsma::RunSummary summary = rsma::run(cfg);
    fmt::print("experiment={} drops={} wall={:.3f}s output={}\n", summary.experiment, summary.drops,
               summary.wall_seconds, summary.output_path);
    return 0;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return rsma::exit_code_for(e);
  }
}
