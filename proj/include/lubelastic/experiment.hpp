#pragma once

/**
 * @file experiment.hpp
 * @brief Experiment configuration, presets and artifact-writing runners behind the CLI.
 *
 * A configuration is a strict JSON document with a `version` field. A `preset` key
 * names a catalog entry that the rest of the document is deep-merged onto.
 */

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lubelastic/forcing.hpp"
#include "lubelastic/fsi.hpp"
#include "lubelastic/scaling.hpp"
#include "lubelastic/thinfilm.hpp"
#include "lubelastic/verify.hpp"

namespace lubelastic {

enum class RunMode { thinfilm, fsi, rates, reynolds };
const char* to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

/// η₀(x) = mean + amplitude·trig(2πk x₁).
struct InitialProfile {
  double mean = 1.0;
  double amplitude = 0.3;
  int k = 1;
  bool sine = true;

  PeriodicField sample(const PeriodicGrid& grid) const;
};

/// Ansatz constants of the nonlinear moving-domain problem, evaluated at one ε.
struct AnsatzSettings {
  NonlinearScalingPreset constants;
  double eps = 0.125;
};

struct Resolution {
  int n = 32;
  int m = 16;  ///< vertical nodes (FSI and rate studies)
};

struct TimeSettings {
  double dt = 1e-4;
  double T_end = 0.1;
  int steps = 1000;         ///< thin-film runs
  int output_every = 10;    ///< thin-film and FSI snapshots
  int samples = 100;        ///< rate studies
  double reduced_dt = 1e-5;
};

struct ExperimentConfig {
  static constexpr int current_version = 1;

  RunMode mode = RunMode::fsi;
  ModelParams model;
  ThinFilmModel thinfilm;
  std::optional<AnsatzSettings> ansatz;
  InitialProfile initial;
  std::vector<double> eps;
  Forcing forcing;
  Resolution resolution;
  TimeSettings time;
  bool refinement = true;
  LadderSpec::Thresholds thresholds;
  std::string output_dir = "lubelastic-out";

  /// Throws ConfigError for anything the selected mode cannot run.
  void validate() const;

  FsiParams fsi_params() const;
  LadderSpec ladder() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Strict: unknown keys, a missing or unsupported version and malformed values raise ConfigError.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Resolves a `preset` key, deep-merges the document onto it and parses the result.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// sha256 of the canonical serialization without output_dir.
std::string config_hash(const ExperimentConfig& c);
std::string sha256_hex(const std::string& bytes);

struct PresetInfo {
  std::string id;
  std::string description;
};

std::vector<PresetInfo> list_presets();
/// Throws NotFound for an unknown id.
ExperimentConfig preset_config(const std::string& id);

struct RunOptions {
  int jobs = 1;
};

struct RunOutcome {
  /// 0 success, 1 verification checks failed, 2 invalid configuration, 3 numerical breakdown.
  int exit_code = 0;
  std::string message;
  nlohmann::json manifest;
};

/// Runs the configured experiment and writes its artifacts plus manifest.json into
/// output_dir. Every file is written to a temporary name and renamed into place.
RunOutcome run(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace lubelastic
