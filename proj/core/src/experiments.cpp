#include "droplet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "droplet/diagnostics.hpp"
#include "droplet/dynamics.hpp"
#include "droplet/error.hpp"
#include "droplet/filters.hpp"
#include "droplet/linalg.hpp"

#ifndef DROPLET_VERSION
#define DROPLET_VERSION "unknown"
#endif

namespace droplet {

namespace {

const std::vector<std::string> kNames = {"spectrum", "dl-decay", "nonspread", "lr",  "cluster",
                                         "optimality", "fermi",  "hastings",  "dos"};

ChainParams localized(int half_length) {
  ChainParams p;
  p.delta = 4.0;
  p.lambda = 4.0;
  p.beta = 0.375;
  p.half_length = half_length;
  return p;
}

ChainParams intermediate(int half_length) {
  ChainParams p;
  p.delta = 2.0;
  p.lambda = 1.0;
  p.beta = 0.25;
  p.half_length = half_length;
  return p;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

// Sites of a pair at distance d placed symmetrically around the origin.
std::pair<int, int> pair_sites(int d) { return {-(d / 2), d - d / 2}; }

EnergyWindow cluster_window(const ExperimentConfig& c) {
  const double theta0 = c.theta0();
  const auto k = c.k_window.value_or(std::make_pair(theta0, (2.0 - 0.75) * theta0));
  return EnergyWindow::closed(k.first, k.second);
}

EnergyWindow deloc_in_window(const ExperimentConfig& c) {
  if (c.k_window) return EnergyWindow::closed(c.k_window->first, c.k_window->second);
  return c.window();
}

EnergyWindow deloc_above_window(const ExperimentConfig& c) {
  return EnergyWindow::closed(c.above_window.first, c.above_window.second);
}

// Filter used by the hastings experiment at pair distance d: it rises across
// [K.hi, I.hi] and its plateau grows like d^alpha.
FilterSpec hastings_filter(const ExperimentConfig& c, int d) {
  FilterSpec f;
  f.alpha = c.alpha;
  f.theta2 = cluster_window(c).hi;
  f.theta1 = c.window().hi;
  f.theta3 = f.theta1 + std::pow(static_cast<double>(d), c.alpha);
  return f;
}

// Filter inside the clean one-magnon band [1 - 1/Delta, 1 + 1/Delta] for the D > 0 check.
FilterSpec band_filter(const ExperimentConfig& c) {
  const double b0 = 1.0 - 1.0 / c.params.delta;
  const double w = 2.0 / c.params.delta;
  FilterSpec f;
  f.alpha = c.alpha;
  f.theta2 = b0 + 0.1 * w;
  f.theta1 = b0 + 0.4 * w;
  f.theta3 = b0 + 0.6 * w;
  f.points_per_unit = 4096.0;
  return f;
}

DiagnosticPoint point(std::string name, double abscissa, double value) {
  return {std::move(name), abscissa, value, std::nullopt, {}};
}

DiagnosticPoint renamed(DiagnosticPoint p, double abscissa) {
  p.abscissa = abscissa;
  return p;
}

std::vector<double> strided(const std::vector<double>& grid, int stride) {
  std::vector<double> out;
  for (std::size_t k = 0; k < grid.size(); k += static_cast<std::size_t>(stride)) out.push_back(grid[k]);
  if (out.back() != grid.back()) out.push_back(grid.back());
  return out;
}

nlohmann::json window_json(const EnergyWindow& w) {
  return {{"lo", w.lo}, {"hi", w.hi}, {"lo_closed", w.lo_closed}, {"hi_closed", w.hi_closed}};
}

const char* disorder_name(DisorderKind k) {
  switch (k) {
    case DisorderKind::uniform01:
      return "uniform01";
    case DisorderKind::iid_density:
      return "iid_density";
    case DisorderKind::ergodic_shift:
      return "ergodic_shift";
  }
  return "unknown";
}

bool is_windowed(const std::string& e) {
  return e == "dl-decay" || e == "nonspread" || e == "lr" || e == "cluster" || e == "optimality";
}

}  // namespace

EnergyWindow ExperimentConfig::window() const { return droplet_window(params.delta, delta_param); }

EnergyWindow ExperimentConfig::window_with_ground() const { return with_ground_state(window()); }

int ExperimentConfig::schedule_reach(int entry) const {
  if (experiment == "optimality" || experiment == "hastings") return pair_sites(entry).second;
  return entry;
}

void ExperimentConfig::trim_schedule() {
  std::erase_if(schedule, [this](int s) { return schedule_reach(s) > params.half_length; });
}

void ExperimentConfig::validate() const {
  if (std::find(kNames.begin(), kNames.end(), experiment) == kNames.end()) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  try {
    params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (realizations < 1) throw ConfigError("realizations must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (!(delta_param > 0.0 && delta_param < 1.0)) throw ConfigError("delta-param must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (double_comm_stride < 1) throw ConfigError("double_comm_stride must be at least 1");
  if (out.empty()) throw ConfigError("output directory must not be empty");

  const int L = params.half_length;
  const int max_l = experiment == "dos" ? 2000 : experiment == "spectrum" ? 6 : is_windowed(experiment) ? 7 : 5;
  if (experiment == "hastings" && L > 4) throw ConfigError("hastings works on the full space; L must be at most 4");
  if (L > max_l) throw ConfigError(experiment + ": L must be at most " + std::to_string(max_l));

  const bool needs_schedule = experiment == "dl-decay" || experiment == "nonspread" || experiment == "lr" ||
                              experiment == "cluster" || experiment == "optimality" || experiment == "hastings";
  if (needs_schedule && schedule.empty()) throw ConfigError(experiment + ": empty schedule");
  for (int s : schedule) {
    if (s < 1) throw ConfigError("schedule entries must be positive");
    if (schedule_reach(s) > L) {
      throw ConfigError(experiment + ": schedule entry " + std::to_string(s) + " leaves the chain [-" +
                        std::to_string(L) + ", " + std::to_string(L) + "]");
    }
  }

  const double theta0 = this->theta0();
  const EnergyWindow i = window();
  if (experiment == "cluster" || experiment == "hastings") {
    const EnergyWindow k = cluster_window(*this);
    if (!(k.lo < k.hi)) throw ConfigError("cluster window must have lo < hi");
    if (k.lo < theta0 - 1e-12) throw ConfigError("cluster window must start at or above Theta_0");
    if (!(k.hi < 2.0 * theta0)) {
      throw ConfigError("cluster window must end below 2 Theta_0 = " + std::to_string(2.0 * theta0) +
                        "; windows above the droplet band are the optimality experiment");
    }
    if (k.hi > i.hi) throw ConfigError("cluster window must lie inside the droplet window");
  }
  if (experiment == "optimality") {
    const EnergyWindow kin = deloc_in_window(*this);
    if (!(kin.lo < kin.hi) || kin.lo < i.lo - 1e-12 || kin.hi > i.hi + 1e-12) {
      throw ConfigError("optimality: the in-droplet window must lie inside the droplet window");
    }
    const EnergyWindow above = deloc_above_window(*this);
    if (!(above.lo < above.hi)) throw ConfigError("optimality: above window must have lo < hi");
    if (above.lo < 2.0 * theta0 - 1e-12) {
      throw ConfigError("optimality: the delocalized branch needs a window at or above 2 Theta_0 = " +
                        std::to_string(2.0 * theta0));
    }
  }
  if (experiment == "dos" && bins < 8) throw ConfigError("dos: need at least 8 bins");
}

std::vector<std::string> experiment_names() { return kNames; }

ExperimentConfig preset(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.params = localized(6);
  if (experiment == "spectrum") {
    c.params = intermediate(5);
    c.realizations = 1000;
  } else if (experiment == "dl-decay") {
    c.schedule = range(1, 5);
  } else if (experiment == "nonspread") {
    c.schedule = range(1, 4);
  } else if (experiment == "lr") {
    c.schedule = range(1, 4);
  } else if (experiment == "cluster") {
    c.schedule = range(1, 5);
  } else if (experiment == "optimality") {
    c.schedule = range(2, 8);
  } else if (experiment == "fermi") {
    c.params = intermediate(5);
    c.realizations = 100;
  } else if (experiment == "hastings") {
    c.params = localized(3);
    c.realizations = 50;
    c.schedule = range(1, 6);
  } else if (experiment == "dos") {
    c.params = intermediate(50);
    c.bins = 64;
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = c.experiment;
  j["params"] = {{"delta", c.params.delta},
                 {"lambda", c.params.lambda},
                 {"beta", c.params.beta},
                 {"L", c.params.half_length},
                 {"n_sites", c.params.n_sites()},
                 {"disorder", disorder_name(c.params.disorder.kind)}};
  j["delta_param"] = c.delta_param;
  j["alpha"] = c.alpha;
  j["realizations"] = c.realizations;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["out"] = c.out;
  j["schedule"] = c.schedule;
  j["t_final"] = c.t_final;
  j["bins"] = c.bins;
  j["double_comm_stride"] = c.double_comm_stride;
  nlohmann::json w;
  w["theta0"] = c.theta0();
  w["droplet"] = window_json(c.window());
  w["droplet_with_ground"] = window_json(c.window_with_ground());
  if (c.experiment == "cluster" || c.experiment == "hastings") w["cluster"] = window_json(cluster_window(c));
  if (c.experiment == "optimality") {
    w["deloc_in"] = window_json(deloc_in_window(c));
    w["deloc_above"] = window_json(deloc_above_window(c));
  }
  j["windows"] = w;
  if (c.params.delta == 4.0 && c.params.lambda == 4.0) {
    j["regime"] = "localized preset (Delta = 4, lambda = 4), chosen empirically";
  }
  return j;
}

SpectralData windowed_spectrum(const ChainParams& params, const EnergyWindow& i0, std::uint64_t realization) {
  const auto omega = sample_disorder(params.disorder, params.half_length, realization);
  DiagonalizeOptions opts;
  opts.range = i0;
  opts.complete_sectors = {1};
  opts.lower_bounds = sector_lower_bounds(params, omega);
  return diagonalize_sectors(params.half_length, build_sector_matrices(params, omega), opts);
}

SpectralData complete_spectrum(const ChainParams& params, std::uint64_t realization, bool vectors) {
  const auto omega = sample_disorder(params.disorder, params.half_length, realization);
  DiagonalizeOptions opts;
  opts.vectors = vectors;
  return diagonalize_sectors(params.half_length, build_sector_matrices(params, omega), opts);
}

RealizationFn realization_function(const ExperimentConfig& config) {
  config.validate();
  ExperimentConfig c = config;
  c.params.disorder.seed = c.seed;
  const int L = c.params.half_length;
  const EnergyWindow i = c.window();
  const EnergyWindow i0 = c.window_with_ground();
  const std::vector<double> grid = default_time_grid();
  const std::string& e = c.experiment;

  if (e == "spectrum") {
    return [c, i](std::uint64_t r) {
      const SpectralData sd = complete_spectrum(c.params, r, false);
      double ground = std::numeric_limits<double>::infinity();
      double excitation = std::numeric_limits<double>::infinity();
      long in_window = 0;
      for (const auto& s : sd.sectors) {
        if (s.values.size() == 0) continue;
        ground = std::min(ground, s.values.minCoeff());
        if (s.n_magnons > 0) excitation = std::min(excitation, s.values.minCoeff());
        for (Eigen::Index k = 0; k < s.values.size(); ++k) in_window += i.contains(s.values(k)) ? 1 : 0;
      }
      const auto& one = sd.sectors[1].values;
      return std::vector<DiagnosticPoint>{point("ground_energy", 0, std::abs(ground)),
                                          point("min_excitation", 0, excitation),
                                          point("one_magnon_min", 0, one.minCoeff()),
                                          point("one_magnon_max", 0, one.maxCoeff()),
                                          point("window_count", 0, static_cast<double>(in_window))};
    };
  }
  if (e == "dl-decay") {
    return [c, i, i0](std::uint64_t r) {
      const SpectralData sd = windowed_spectrum(c.params, i0, r);
      const WindowBasis b = window_basis(sd, i);
      std::vector<DiagnosticPoint> pts;
      for (int s : c.schedule) pts.push_back(point("dl_kernel", 2 * s, dl_kernel(b, sd, -s, s)));
      return pts;
    };
  }
  if (e == "nonspread") {
    return [c, i0, grid, L](std::uint64_t r) {
      const SpectralData sd = windowed_spectrum(c.params, i0, r);
      const WindowBasis b0 = window_basis(sd, i0);
      const Observable x = sigma_x(L, 0);
      std::vector<DiagnosticPoint> pts;
      for (int ell : c.schedule) pts.push_back(renamed(NonspreadPlan(b0, x, ell).sup(grid), ell));
      return pts;
    };
  }
  if (e == "lr") {
    const std::vector<double> coarse = strided(grid, c.double_comm_stride);
    return [c, i, i0, grid, coarse, L](std::uint64_t r) {
      const SpectralData sd = windowed_spectrum(c.params, i0, r);
      const WindowBasis bi = window_basis(sd, i);
      const WindowBasis b0 = window_basis(sd, i0);
      const Observable z = sigma_z(L, 0);
      std::vector<DiagnosticPoint> pts;
      for (int s : c.schedule) {
        const Observable x = sigma_x(L, -s);
        const Observable y = sigma_x(L, s);
        const double d = 2 * s;
        pts.push_back(renamed(lr_norm(bi, pair_data(bi, x, y), grid), d));
        const auto ct = lr_counterterm_residual(b0, pair_data(b0, x, y), i, grid);
        pts.push_back(renamed(ct.with_counterterms, d));
        pts.push_back(renamed(ct.plain, d));
        pts.push_back(renamed(double_comm_norm(b0, x, y, z, coarse, coarse), d));
      }
      return pts;
    };
  }
  if (e == "cluster") {
    const EnergyWindow k = cluster_window(c);
    return [c, k, i0, grid, L](std::uint64_t r) {
      const SpectralData sd = windowed_spectrum(c.params, i0, r);
      const WindowBasis kb = window_basis(sd, k);
      std::vector<DiagnosticPoint> pts;
      for (int s : c.schedule) {
        const auto res =
            clustering_residual(sd, kb, sigma_x(L, -s), sigma_x(L, s), c.theta0(), c.alpha, grid);
        const double d = 2 * s;
        pts.push_back(renamed(res.residual, d));
        pts.push_back(renamed(res.plain, d));
        pts.push_back(renamed(res.per_eigenstate, d));
        pts.push_back(renamed(res.counterterm_trace, d));
      }
      return pts;
    };
  }
  if (e == "optimality") {
    const EnergyWindow kin = deloc_in_window(c);
    const EnergyWindow above = deloc_above_window(c);
    return [c, kin, above, i0](std::uint64_t r) {
      const SpectralData sd = windowed_spectrum(c.params, i0, r);
      const WindowBasis bin = window_basis(sd, kin);
      std::vector<DiagnosticPoint> pts;
      for (int d : c.schedule) {
        const auto [a, b] = pair_sites(d);
        // The finite-T average is the subject of its own check; here only the closed form is needed.
        const DelocWitness win = deloc_witness(sd, a, b, kin, c.params.delta, 0.0);
        const DelocWitness wab = deloc_witness(sd, a, b, above, c.params.delta, 0.0);
        pts.push_back(point("deloc_in", d, win.single));
        pts.push_back(point("deloc_above", d, wab.single));
        pts.push_back(point("deloc_plus_above", d, wab.plus));
        pts.push_back(point("deloc_minus_above", d, wab.minus));
        pts.push_back(point("cesaro_in", d, win.cesaro));
        pts.push_back(point("cesaro_above", d, wab.cesaro));
        pts.push_back(point("dl_kernel_in", d, dl_kernel(bin, sd, a, b)));
      }
      return pts;
    };
  }
  if (e == "fermi") {
    return [c, L](std::uint64_t r) {
      const SpectralData sd = complete_spectrum(c.params, r);
      const double theta = fermi_theta(c.params.delta, c.params.lambda, c.params.beta);
      const FermiCheck f = fermi_check(sd, sigma_x(L, 0), theta, 1.0);
      return std::vector<DiagnosticPoint>{point("fermi_violations", 0, static_cast<double>(f.violations)),
                                          point("fermi_pairs", 0, static_cast<double>(f.pairs)),
                                          point("fermi_trivial", 0, static_cast<double>(f.trivial)),
                                          point("fermi_computed", 0, static_cast<double>(f.computed)),
                                          point("fermi_max_ratio", 0, f.max_ratio)};
    };
  }
  if (e == "hastings") {
    auto filters = std::make_shared<std::vector<Filter>>();
    for (int d : c.schedule) filters->emplace_back(hastings_filter(c, d));
    const EnergyWindow k = cluster_window(c);
    return [c, k, filters, L](std::uint64_t r) {
      const SpectralData sd = complete_spectrum(c.params, r);
      std::vector<DiagnosticPoint> pts;
      for (std::size_t n = 0; n < c.schedule.size(); ++n) {
        const int d = c.schedule[n];
        const auto [a, b] = pair_sites(d);
        const Observable x = sigma_x(L, a);
        const Observable y = sigma_x(L, b);
        const Filter& f = (*filters)[n];
        pts.push_back(point("hastings_residual", d, hastings_residual(sd, x, y, f).residual));
        const auto fn = [&f](double e) { return f(e); };
        pts.push_back(point("insertion_residual", d,
                            insertion_check(sd, x, y, fn, f.spec().support_lo(), f.spec().support_hi(), k)));
        pts.push_back(point("lr_full_commutator", d, full_commutator_norm(sd, x, y, 1.0)));
      }
      return pts;
    };
  }
  // dos
  auto filter = std::make_shared<Filter>(band_filter(c));
  return [c, filter](std::uint64_t r) {
    const auto omega = sample_disorder(c.params.disorder, c.params.half_length, r);
    const auto eig = linalg::symmetric_eigen(one_magnon_anderson(c.params, omega), false);
    const DoSHistogram h = one_magnon_histogram(eig.values, c.params, c.bins);
    std::vector<DiagnosticPoint> pts;
    for (std::size_t k = 0; k < h.mass.size(); ++k) pts.push_back(point("dos", h.center(k), h.mass[k]));
    const auto f2 = [&filter](double e) {
      const double v = (*filter)(e);
      return v * v;
    };
    pts.push_back(point("dos_D", 0, dos_functional(eig.values, f2)));
    return pts;
  };
}

EnsembleResult run_experiment(const ExperimentConfig& config) {
  const RealizationFn fn = realization_function(config);
  return run_ensemble(config.experiment, {config.realizations, 0, config.jobs}, fn);
}

nlohmann::json decay_fits(const ExperimentConfig& config, const EnsembleResult& result) {
  std::vector<std::pair<std::string, DecayModel>> series;
  const std::string& e = config.experiment;
  if (e == "dl-decay") series = {{"dl_kernel", DecayModel::exponential}};
  if (e == "nonspread") series = {{"nonspread", DecayModel::exponential}};
  if (e == "lr") series = {{"lr_norm", DecayModel::exponential}, {"lr_counterterm_residual", DecayModel::exponential}};
  if (e == "cluster") {
    series = {{"clustering_residual", DecayModel::exponential}, {"counterterm_trace", DecayModel::exponential}};
  }
  if (e == "optimality") {
    series = {{"deloc_in", DecayModel::exponential},
              {"deloc_above", DecayModel::exponential},
              {"dl_kernel_in", DecayModel::exponential}};
  }
  if (e == "hastings") series = {{"hastings_residual", DecayModel::stretched}};
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [name, model] : series) {
    nlohmann::json j;
    j["series"] = name;
    j["model"] = model == DecayModel::exponential ? "exponential" : "stretched";
    std::vector<double> xs, ys;
    for (const auto& row : result.series(name)) {
      xs.push_back(row.abscissa);
      ys.push_back(row.mean);
    }
    try {
      const double alpha = model == DecayModel::exponential ? 1.0 : config.alpha;
      const DecayFit f = fit_decay(xs, ys, model, alpha);
      j["alpha"] = f.alpha;
      j["m"] = f.rate;
      j["C"] = f.prefactor;
      j["r_squared"] = f.r_squared;
      j["m_stderr"] = f.rate_stderr;
      j["log_C_stderr"] = f.log_prefactor_stderr;
      j["n_points"] = f.n_points;
      j["floored"] = f.floored;
    } catch (const std::exception& ex) {
      j["error"] = ex.what();
    }
    out.push_back(j);
  }
  return out;
}

std::filesystem::path run_and_persist(const ExperimentConfig& config, EnsembleResult* result) {
  config.validate();
  nlohmann::json manifest;
  manifest["config"] = to_json(config);
  manifest["code_version"] = DROPLET_VERSION;
  manifest["time_grid"] = {{"kind", "default"}, {"points", default_time_grid()}};
  const std::filesystem::path dir = prepare_run(config.out, config.experiment, manifest);
  try {
    EnsembleResult r = run_experiment(config);
    manifest["fits"] = decay_fits(config, r);
    manifest["single_realization"] = config.realizations == 1;
    persist(r, dir, manifest);
    if (result) *result = std::move(r);
  } catch (const std::exception& ex) {
    mark_failed(dir, manifest, ex.what());
    throw;
  }
  return dir;
}

}  // namespace droplet
