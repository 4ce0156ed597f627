#include "droplet/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "droplet/error.hpp"
#include "droplet/linalg.hpp"

namespace droplet {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace

const AggregateRow* EnsembleResult::find(const std::string& name, double abscissa) const {
  for (const auto& r : rows) {
    if (r.experiment == name && r.abscissa == abscissa) return &r;
  }
  return nullptr;
}

std::vector<AggregateRow> EnsembleResult::series(const std::string& name) const {
  std::vector<AggregateRow> out;
  for (const auto& r : rows) {
    if (r.experiment == name) out.push_back(r);
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<RealizationRecord>& records) {
  struct Samples {
    std::vector<double> values;
    std::vector<double> t_stars;
  };
  std::map<std::pair<std::string, double>, Samples> groups;
  for (const auto& rec : records) {
    if (!rec.ok) continue;
    for (const auto& p : rec.points) {
      auto& g = groups[{p.name, p.abscissa}];
      g.values.push_back(p.value);
      if (p.t_star) g.t_stars.push_back(*p.t_star);
    }
  }
  std::vector<AggregateRow> rows;
  for (auto& [key, g] : groups) {
    AggregateRow row;
    row.experiment = key.first;
    row.abscissa = key.second;
    row.n = static_cast<long>(g.values.size());
    double sum = 0.0;
    for (double v : g.values) sum += v;
    row.mean = sum / static_cast<double>(row.n);
    if (row.n > 1) {
      double ss = 0.0;
      for (double v : g.values) ss += (v - row.mean) * (v - row.mean);
      row.stderr_mean = std::sqrt(ss / static_cast<double>(row.n - 1)) / std::sqrt(static_cast<double>(row.n));
    }
    std::vector<double> sorted = g.values;
    std::sort(sorted.begin(), sorted.end());
    const auto mid = sorted.size() / 2;
    row.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    if (!g.t_stars.empty()) {
      std::sort(g.t_stars.begin(), g.t_stars.end());
      double best = g.t_stars.front();
      std::size_t best_count = 0;
      for (std::size_t k = 0; k < g.t_stars.size();) {
        std::size_t e = k;
        while (e < g.t_stars.size() && g.t_stars[e] == g.t_stars[k]) ++e;
        if (e - k > best_count) {
          best_count = e - k;
          best = g.t_stars[k];
        }
        k = e;
      }
      row.t_star_mode = best;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

EnsembleResult run_ensemble(const std::string& experiment, const EnsembleOptions& opts, const RealizationFn& fn) {
  if (opts.realizations < 1) throw InvalidArgument("run_ensemble: need at least one realization");
  const auto start = std::chrono::steady_clock::now();
  EnsembleResult result;
  result.experiment = experiment;
  result.realizations.resize(opts.realizations);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= opts.realizations) return;
      RealizationRecord& rec = result.realizations[k];
      rec.index = opts.first_realization + k;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        rec.points = fn(rec.index);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
        rec.points.clear();
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(opts.realizations)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& rec : result.realizations) {
    if (!rec.ok) ++result.failures;
  }
  if (result.failures == static_cast<long>(opts.realizations)) {
    throw Error("run_ensemble: no realization succeeded (first error: " + result.realizations.front().error + ")");
  }
  result.rows = aggregate(result.realizations);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw Error("write failed for " + path.string());
}

void write_data_csv(const std::vector<AggregateRow>& rows, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << kDataHeader << '\n';
  for (const auto& r : rows) {
    os << r.experiment << ',' << format_double(r.abscissa) << ',' << format_double(r.mean) << ','
       << format_double(r.stderr_mean) << ',' << format_double(r.median) << ',' << r.n << ','
       << (r.t_star_mode ? format_double(*r.t_star_mode) : std::string()) << '\n';
  }
  if (!os) throw Error("write failed for " + path.string());
}

namespace {

// from_chars accepts subnormals, which std::stod rejects with out_of_range.
template <class T>
T parse_number(const std::string& cell, const fs::path& path) {
  T v{};
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || end != cell.data() + cell.size()) {
    throw Error("malformed number '" + cell + "' in " + path.string());
  }
  return v;
}

}  // namespace

std::vector<AggregateRow> read_data_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kDataHeader) throw Error("unexpected header in " + path.string());
  std::vector<AggregateRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 7) throw Error("malformed row in " + path.string() + ": " + line);
    AggregateRow r;
    r.experiment = f[0];
    r.abscissa = parse_number<double>(f[1], path);
    r.mean = parse_number<double>(f[2], path);
    r.stderr_mean = parse_number<double>(f[3], path);
    r.median = parse_number<double>(f[4], path);
    r.n = parse_number<long>(f[5], path);
    if (!f[6].empty()) r.t_star_mode = parse_number<double>(f[6], path);
    rows.push_back(std::move(r));
  }
  return rows;
}

fs::path prepare_run(const fs::path& root, const std::string& experiment, const nlohmann::json& manifest) {
  const fs::path base = root / experiment;
  const std::string stamp = utc_timestamp();
  fs::path dir = base / stamp;
  for (int k = 2; fs::exists(dir); ++k) dir = base / (stamp + "-" + std::to_string(k));
  std::error_code ec;
  fs::create_directories(dir / "per_real", ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json m = manifest;
  m["schema_version"] = kSchemaVersion;
  m["experiment"] = experiment;
  m["created_utc"] = stamp;
  m["status"] = "running";
  write_json(m, dir / "manifest.json");
  return dir;
}

void persist(const EnsembleResult& result, const fs::path& dir, nlohmann::json manifest) {
  std::error_code ec;
  fs::create_directories(dir / "per_real", ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  write_data_csv(result.rows, dir / "data.csv");
  nlohmann::json timings = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  std::map<std::string, std::map<std::string, long>> flag_counts;
  for (const auto& rec : result.realizations) {
    timings.push_back({{"realization", rec.index}, {"seconds", rec.seconds}, {"ok", rec.ok}});
    if (!rec.ok) failures.push_back({{"realization", rec.index}, {"error", rec.error}});
    const fs::path p = dir / "per_real" / ("r" + std::to_string(rec.index) + ".csv");
    std::ofstream os(p);
    if (!os) throw Error("cannot open " + p.string() + " for writing");
    os << kPerRealHeader << '\n';
    for (const auto& pt : rec.points) {
      std::string flags;
      for (const auto& f : pt.flags) {
        flags += (flags.empty() ? "" : ";") + f;
        ++flag_counts[pt.name][f];
      }
      os << pt.name << ',' << format_double(pt.abscissa) << ',' << format_double(pt.value) << ','
         << (pt.t_star ? format_double(*pt.t_star) : std::string()) << ',' << flags << '\n';
    }
    if (!os) throw Error("write failed for " + p.string());
  }
  manifest["schema_version"] = kSchemaVersion;
  manifest["experiment"] = result.experiment;
  manifest["status"] = "complete";
  manifest["wall_seconds"] = result.wall_seconds;
  manifest["realizations_ok"] = static_cast<long>(result.realizations.size()) - result.failures;
  manifest["failures"] = failures;
  manifest["timings"] = timings;
  manifest["flag_counts"] = flag_counts;
  write_json(manifest, dir / "manifest.json");
}

void mark_failed(const fs::path& dir, nlohmann::json manifest, const std::string& message) {
  manifest["status"] = "failed";
  manifest["error"] = message;
  write_json(manifest, dir / "manifest.json");
}

// ---------------------------------------------------------------------------

std::pair<double, double> one_magnon_range(const ChainParams& params) {
  const double edge = 0.5 + params.beta;
  const double hop = 1.0 / params.delta;
  return {std::min(1.0, edge) - hop, std::max(1.0, edge) + params.lambda + hop};
}

DoSHistogram one_magnon_histogram(const Eigen::VectorXd& eigenvalues, const ChainParams& params, int bins) {
  if (bins < 8) throw InvalidArgument("dos: need at least 8 bins");
  const auto [lo, hi] = one_magnon_range(params);
  DoSHistogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) h.edges[k] = lo + (hi - lo) * k / bins;
  h.mass.assign(static_cast<std::size_t>(bins), 0.0);
  if (eigenvalues.size() == 0) return h;
  const double unit = 1.0 / static_cast<double>(eigenvalues.size());
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    const double u = (eigenvalues(k) - lo) / (hi - lo) * bins;
    const int b = std::clamp(static_cast<int>(std::floor(u)), 0, bins - 1);
    h.mass[static_cast<std::size_t>(b)] += unit;
  }
  return h;
}

DoSHistogram dos_estimate(const ChainParams& params, std::uint64_t realizations, int bins, int jobs) {
  if (bins < 8) throw InvalidArgument("dos_estimate: need at least 8 bins");
  params.validate();
  const auto result = run_ensemble("dos", {realizations, 0, jobs}, [&](std::uint64_t r) {
    const auto omega = sample_disorder(params.disorder, params.half_length, r);
    const auto eig = linalg::symmetric_eigen(one_magnon_anderson(params, omega), false);
    const DoSHistogram h = one_magnon_histogram(eig.values, params, bins);
    std::vector<DiagnosticPoint> pts;
    for (int k = 0; k < bins; ++k) pts.push_back({"dos", static_cast<double>(k), h.mass[k], std::nullopt, {}});
    return pts;
  });
  DoSHistogram out = one_magnon_histogram(Eigen::VectorXd(), params, bins);
  double total = 0.0;
  for (const auto& row : result.rows) {
    out.mass[static_cast<std::size_t>(row.abscissa)] = row.mean;
    total += row.mean;
  }
  for (double& m : out.mass) m /= total;
  return out;
}

double dos_functional(const Eigen::VectorXd& eigenvalues, const std::function<double(double)>& g) {
  if (eigenvalues.size() == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) s += g(eigenvalues(k));
  return s / static_cast<double>(eigenvalues.size());
}

}  // namespace droplet
