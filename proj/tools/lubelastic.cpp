// Command-line front end: thin-film runs, FSI runs, stationary Reynolds solves and
// ε-ladder rate studies driven by JSON configurations or named presets.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lubelastic/errors.hpp"
#include "lubelastic/experiment.hpp"

namespace {

enum ExitCode { ok = 0, usage = 2 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lubelastic");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("LUBELASTIC_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept a recognized name
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring LUBELASTIC_LOG={}", env);
    }
  }
}

struct RunArgs {
  std::string config;
  std::string preset;
  std::string output;
  std::vector<int> resolution;
  int jobs = 1;
};

void add_run_options(CLI::App* cmd, RunArgs& args, bool jobs) {
  auto* cfg = cmd->add_option("--config", args.config, "JSON configuration file")->check(CLI::ExistingFile);
  auto* pre = cmd->add_option("--preset", args.preset, "start from a catalog preset");
  cfg->excludes(pre);
  cmd->add_option("--output", args.output, "output directory (overrides output_dir)");
  cmd->add_option("--resolution", args.resolution, "horizontal points n, optionally vertical nodes m: n[,m]")
      ->delimiter(',')
      ->expected(1, 2);
  if (jobs) cmd->add_option("--jobs", args.jobs, "concurrent runs")->check(CLI::PositiveNumber);
}

int execute(const RunArgs& args, lubelastic::RunMode expected) {
  using namespace lubelastic;
  ExperimentConfig config;
  try {
    if (args.config.empty() && args.preset.empty()) throw ConfigError("either --config or --preset is required");
    config = args.config.empty() ? preset_config(args.preset) : load_config(args.config);
    if (config.mode != expected) {
      throw ConfigError(std::string("configuration mode '") + to_string(config.mode) + "' does not match this command");
    }
    if (!args.output.empty()) config.output_dir = args.output;
    if (!args.resolution.empty()) {
      config.resolution.n = args.resolution[0];
      if (args.resolution.size() > 1) config.resolution.m = args.resolution[1];
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return usage;
  }

  const RunOutcome outcome = run(config, RunOptions{args.jobs});
  if (outcome.exit_code != 0) spdlog::error("{}", outcome.message);
  if (!outcome.manifest.is_null()) std::cout << outcome.manifest.dump(2) << '\n';
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Thin-film lubrication and fluid-structure interaction experiments"};
  app.require_subcommand(1);

  RunArgs args;

  auto* thinfilm = app.add_subcommand("thinfilm", "reduced thin-film models");
  thinfilm->require_subcommand(1);
  auto* thinfilm_run = thinfilm->add_subcommand("run", "integrate a thin-film equation");
  add_run_options(thinfilm_run, args, false);

  auto* fsi = app.add_subcommand("fsi", "full-order channel flow coupled to a plate");
  fsi->require_subcommand(1);
  auto* fsi_run = fsi->add_subcommand("run", "integrate the coupled system");
  add_run_options(fsi_run, args, false);

  auto* reynolds = app.add_subcommand("reynolds", "stationary lubrication pressure");
  reynolds->require_subcommand(1);
  auto* reynolds_solve = reynolds->add_subcommand("solve", "solve for the pressure of a fixed profile");
  add_run_options(reynolds_solve, args, false);

  auto* verify = app.add_subcommand("verify", "convergence studies");
  verify->require_subcommand(1);
  auto* verify_rates = verify->add_subcommand("rates", "error rates over an eps-ladder");
  add_run_options(verify_rates, args, true);

  auto* presets = app.add_subcommand("presets", "configuration catalog");
  presets->require_subcommand(1);
  auto* presets_list = presets->add_subcommand("list", "list preset ids");
  std::string show_id;
  auto* presets_show = presets->add_subcommand("show", "print a preset as a configuration document");
  presets_show->add_option("id", show_id, "preset id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  using lubelastic::RunMode;
  if (*thinfilm_run) return execute(args, RunMode::thinfilm);
  if (*fsi_run) return execute(args, RunMode::fsi);
  if (*reynolds_solve) return execute(args, RunMode::reynolds);
  if (*verify_rates) return execute(args, RunMode::rates);
  if (*presets_list) {
    for (const auto& p : lubelastic::list_presets()) std::cout << p.id << '\t' << p.description << '\n';
    return ok;
  }
  if (*presets_show) {
    try {
      const nlohmann::json j = lubelastic::preset_config(show_id);
      std::cout << j.dump(2) << '\n';
    } catch (const lubelastic::NotFound& e) {
      spdlog::error("{}", e.what());
      return usage;
    }
    return ok;
  }
  return usage;
}
