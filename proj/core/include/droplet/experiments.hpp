#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "droplet/ensemble.hpp"
#include "droplet/hamiltonian.hpp"
#include "droplet/spectral.hpp"

namespace droplet {

/// A fully resolved experiment. Presets fill every field; config files and
/// command-line flags override individual fields.
struct ExperimentConfig {
  std::string experiment;
  ChainParams params;
  double delta_param = 0.5;  // delta' of the droplet window I_{1,delta'}
  double alpha = 0.5;        // Gevrey class of the filters
  std::uint64_t realizations = 200;
  std::uint64_t seed = 20240611;
  int jobs = 1;
  std::string out = "out";
  /// Site or distance schedule; its meaning depends on the experiment.
  std::vector<int> schedule;
  /// Cluster window K = [Theta_0, k_hi] (cluster) or the in-droplet deloc window (optimality).
  std::optional<std::pair<double, double>> k_window;
  /// Deloc window above 2 Theta_0 (optimality).
  std::pair<double, double> above_window{1.5, 2.5};
  double t_final = 1e4;  // Cesaro horizon
  int bins = 64;         // DoS histogram
  /// Keep every k-th point of the default time grid for the (t, s) sweep of the double commutator.
  int double_comm_stride = 4;

  /// I_{1,delta'} for the configured anisotropy.
  EnergyWindow window() const;
  /// [0, I.hi].
  EnergyWindow window_with_ground() const;
  double theta0() const { return 1.0 - 1.0 / params.delta; }
  /// Largest |site| a schedule entry touches.
  int schedule_reach(int entry) const;
  /// Drops schedule entries that do not fit the chain, for presets run at a smaller L.
  void trim_schedule();
  /// Throws ConfigError when the configuration cannot be run.
  void validate() const;
};

std::vector<std::string> experiment_names();
/// Default configuration of an experiment; throws ConfigError on unknown names.
ExperimentConfig preset(const std::string& experiment);

/// Echo of every resolved field including the window endpoints in use.
nlohmann::json to_json(const ExperimentConfig& config);

/// The per-realization computation of the experiment.
RealizationFn realization_function(const ExperimentConfig& config);
EnsembleResult run_experiment(const ExperimentConfig& config);

/// Decay fits of the series an experiment is about, as recorded in the manifest.
nlohmann::json decay_fits(const ExperimentConfig& config, const EnsembleResult& result);

/// Runs the experiment below `<out>/<experiment>/`, writing the manifest before
/// computing. On failure the manifest records the error and the exception propagates.
std::filesystem::path run_and_persist(const ExperimentConfig& config, EnsembleResult* result = nullptr);

/// Spectral data of one realization restricted to what the diagnostics need:
/// eigenpairs in [0, I.hi] (sectors provably above it are skipped) plus the
/// complete one-magnon sector.
SpectralData windowed_spectrum(const ChainParams& params, const EnergyWindow& i0, std::uint64_t realization);
SpectralData complete_spectrum(const ChainParams& params, std::uint64_t realization, bool vectors = true);

}  // namespace droplet
