#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "droplet/experiments.hpp"

namespace droplet::cli {

/// Command-line overrides; unset fields fall back to the config file, then the preset.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> realizations;
  std::optional<int> half_length;
  std::optional<double> delta;
  std::optional<double> lambda;
  std::optional<double> beta;
  std::optional<double> delta_param;
  std::optional<double> alpha;
  std::optional<int> jobs;
};

/// Fields a TOML document set explicitly.
struct TomlKeys {
  bool out = false;
  bool schedule = false;
};

/// Applies the keys of a TOML document to `config`; unknown keys and type
/// mismatches raise ConfigError.
TomlKeys apply_toml(ExperimentConfig& config, const std::string& toml_text, const std::string& origin);

/// Preset, then config file, then flags; `env_out` is the output root used when
/// neither the file nor the flags name one. A preset schedule is trimmed to the
/// chain when L is lowered; an explicit one is validated as given. The result
/// is validated.
ExperimentConfig resolve_config(const std::string& experiment, const Overrides& overrides,
                                const char* env_out = nullptr);

/// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace droplet::cli
