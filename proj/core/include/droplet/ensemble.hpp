#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "droplet/diagnostics.hpp"
#include "droplet/hamiltonian.hpp"

namespace droplet {

/// Output of one disorder realization.
struct RealizationRecord {
  std::uint64_t index = 0;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
  std::vector<DiagnosticPoint> points;
};

/// Aggregate over successful realizations for one (name, abscissa) pair.
struct AggregateRow {
  std::string experiment;
  double abscissa = 0.0;
  double mean = 0.0;
  double stderr_mean = 0.0;  // sample stdev / sqrt(n); 0 when n = 1
  double median = 0.0;
  long n = 0;
  std::optional<double> t_star_mode;
};

struct EnsembleResult {
  std::string experiment;
  std::vector<AggregateRow> rows;
  std::vector<RealizationRecord> realizations;  // sorted by index
  long failures = 0;
  double wall_seconds = 0.0;

  /// Row for (name, abscissa), if present.
  const AggregateRow* find(const std::string& name, double abscissa) const;
  /// All rows of one diagnostic, ordered by abscissa.
  std::vector<AggregateRow> series(const std::string& name) const;
};

struct EnsembleOptions {
  std::uint64_t realizations = 1;
  std::uint64_t first_realization = 0;
  int jobs = 1;
};

using RealizationFn = std::function<std::vector<DiagnosticPoint>(std::uint64_t realization)>;

/// Runs `fn` for every realization on a pool of `jobs` workers. The result
/// does not depend on the worker count. Failing realizations are recorded and
/// skipped; throws when none succeeds.
EnsembleResult run_ensemble(const std::string& experiment, const EnsembleOptions& opts, const RealizationFn& fn);

/// Deterministic aggregation of the successful records (sorted by index).
std::vector<AggregateRow> aggregate(const std::vector<RealizationRecord>& records);

// ---------------------------------------------------------------------------
// Persistence: <root>/<experiment>/<timestamp>/{data.csv, manifest.json, per_real/}

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kDataHeader = "experiment,abscissa,mean,stderr,median,n,t_star_mode";
/// per_real/r<index>.csv; flags are separated by ';'.
inline constexpr const char* kPerRealHeader = "name,abscissa,value,t_star,flags";

/// Creates the run directory and writes the initial manifest.
std::filesystem::path prepare_run(const std::filesystem::path& root, const std::string& experiment,
                                  const nlohmann::json& manifest);
/// Writes data.csv, per_real/ and the final manifest into `dir`.
void persist(const EnsembleResult& result, const std::filesystem::path& dir, nlohmann::json manifest);
/// Records a failed run in the manifest, keeping whatever was written.
void mark_failed(const std::filesystem::path& dir, nlohmann::json manifest, const std::string& message);

void write_data_csv(const std::vector<AggregateRow>& rows, const std::filesystem::path& path);
std::vector<AggregateRow> read_data_csv(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Density of states of the one-magnon model

struct DoSHistogram {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<double> mass;   // probability per bin, sums to 1
  double center(std::size_t k) const { return 0.5 * (edges[k] + edges[k + 1]); }
};

/// Interval guaranteed to contain the one-magnon spectrum (Gershgorin).
std::pair<double, double> one_magnon_range(const ChainParams& params);
/// Histogram of the one-magnon eigenvalues of a single realization.
DoSHistogram one_magnon_histogram(const Eigen::VectorXd& eigenvalues, const ChainParams& params, int bins);
/// Disorder-averaged histogram; requires bins >= 8.
DoSHistogram dos_estimate(const ChainParams& params, std::uint64_t realizations, int bins, int jobs = 1);
/// Per-site average of g(E) over one-magnon eigenvalues, i.e. int g d(eta) for one realization.
double dos_functional(const Eigen::VectorXd& eigenvalues, const std::function<double(double)>& g);

}  // namespace droplet
