#include "droplet_cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <toml.hpp>

#include "droplet/error.hpp"

namespace droplet::cli {

namespace {

double as_double(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError("config key '" + key + "' must be a number");
}

std::int64_t as_int(const toml::node& n, const std::string& key) {
  if (n.is_integer()) return *n.value<std::int64_t>();
  throw ConfigError("config key '" + key + "' must be an integer");
}

std::uint64_t as_count(const toml::node& n, const std::string& key) {
  const auto v = as_int(n, key);
  if (v < 0) throw ConfigError("config key '" + key + "' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

std::pair<double, double> as_pair(const toml::node& n, const std::string& key) {
  const auto* arr = n.as_array();
  if (!arr || arr->size() != 2) throw ConfigError("config key '" + key + "' must be a two-element array [lo, hi]");
  return {as_double((*arr)[0], key), as_double((*arr)[1], key)};
}

void apply_chain(ExperimentConfig& c, const toml::table& t) {
  for (auto&& [k, v] : t) {
    const std::string key(k.str());
    const std::string path = "chain." + key;
    if (key == "L") {
      c.params.half_length = static_cast<int>(as_int(v, path));
    } else if (key == "delta") {
      c.params.delta = as_double(v, path);
    } else if (key == "lambda") {
      c.params.lambda = as_double(v, path);
    } else if (key == "beta") {
      c.params.beta = as_double(v, path);
    } else {
      throw ConfigError("unknown config key '" + path + "'");
    }
  }
}

void apply_windows(ExperimentConfig& c, const toml::table& t) {
  for (auto&& [k, v] : t) {
    const std::string key(k.str());
    const std::string path = "windows." + key;
    if (key == "k") {
      c.k_window = as_pair(v, path);
    } else if (key == "above") {
      c.above_window = as_pair(v, path);
    } else {
      throw ConfigError("unknown config key '" + path + "'");
    }
  }
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TomlKeys apply_toml(ExperimentConfig& c, const std::string& text, const std::string& origin) {
  TomlKeys given;
  toml::table doc;
  try {
    doc = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config file '" << origin << "': " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
  for (auto&& [k, v] : doc) {
    const std::string key(k.str());
    if (key == "chain" || key == "windows") {
      const auto* t = v.as_table();
      if (!t) throw ConfigError("config key '" + key + "' must be a table");
      if (key == "chain") apply_chain(c, *t);
      if (key == "windows") apply_windows(c, *t);
    } else if (key == "experiment") {
      const auto name = v.value<std::string>();
      if (!name || *name != c.experiment) {
        throw ConfigError("config file is for experiment '" + name.value_or("?") + "', not '" + c.experiment + "'");
      }
    } else if (key == "realizations") {
      c.realizations = as_count(v, key);
    } else if (key == "seed") {
      c.seed = as_count(v, key);
    } else if (key == "jobs") {
      c.jobs = static_cast<int>(as_int(v, key));
    } else if (key == "out") {
      const auto s = v.value<std::string>();
      if (!s) throw ConfigError("config key 'out' must be a string");
      c.out = *s;
      given.out = true;
    } else if (key == "delta_param") {
      c.delta_param = as_double(v, key);
    } else if (key == "alpha") {
      c.alpha = as_double(v, key);
    } else if (key == "t_final") {
      c.t_final = as_double(v, key);
    } else if (key == "bins") {
      c.bins = static_cast<int>(as_int(v, key));
    } else if (key == "double_comm_stride") {
      c.double_comm_stride = static_cast<int>(as_int(v, key));
    } else if (key == "schedule") {
      const auto* arr = v.as_array();
      if (!arr) throw ConfigError("config key 'schedule' must be an array of integers");
      c.schedule.clear();
      for (const auto& e : *arr) c.schedule.push_back(static_cast<int>(as_int(e, key)));
      given.schedule = true;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return given;
}

ExperimentConfig resolve_config(const std::string& experiment, const Overrides& o, const char* env_out) {
  ExperimentConfig c = preset(experiment);
  TomlKeys given;
  if (o.config) given = apply_toml(c, read_file(*o.config), *o.config);
  if (!given.out && env_out && *env_out) c.out = env_out;
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.realizations) c.realizations = *o.realizations;
  if (o.half_length) c.params.half_length = *o.half_length;
  if (o.delta) c.params.delta = *o.delta;
  if (o.lambda) c.params.lambda = *o.lambda;
  if (o.beta) c.params.beta = *o.beta;
  if (o.delta_param) c.delta_param = *o.delta_param;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.jobs) c.jobs = *o.jobs;
  if (!given.schedule) c.trim_schedule();
  c.validate();
  return c;
}

int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for the disordered XXZ droplet regime", "droplet_lab"};
  app.require_subcommand(1);
  Overrides o;
  bool dry_run = false;
  std::vector<CLI::App*> subs;
  for (const auto& name : experiment_names()) {
    CLI::App* s = app.add_subcommand(name, "Run the " + name + " experiment");
    s->add_option("--config", o.config, "TOML config file");
    s->add_option("--out", o.out, "Output root (default: $DROPLET_LAB_OUT, else ./out)");
    s->add_option("--seed", o.seed, "Disorder seed");
    s->add_option("--realizations", o.realizations, "Number of disorder realizations");
    s->add_option("--L", o.half_length, "Half-length L; the chain has 2L+1 sites");
    s->add_option("--delta", o.delta, "Anisotropy Delta > 1");
    s->add_option("--lambda", o.lambda, "Disorder strength lambda >= 0");
    s->add_option("--beta", o.beta, "Boundary field beta");
    s->add_option("--delta-param", o.delta_param, "Droplet window parameter delta' in (0, 1)");
    s->add_option("--alpha", o.alpha, "Gevrey class alpha in (0, 1)");
    s->add_option("--jobs", o.jobs, "Worker threads");
    s->add_flag("--dry-run", dry_run, "Print the resolved configuration and exit");
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }
  std::string experiment;
  for (auto* s : subs) {
    if (s->parsed()) experiment = s->get_name();
  }

  ExperimentConfig config;
  try {
    config = resolve_config(experiment, o, std::getenv("DROPLET_LAB_OUT"));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (dry_run) {
    out << to_json(config).dump(2) << '\n';
    return kExitOk;
  }
  try {
    err << "droplet_lab: " << experiment << " with " << config.realizations << " realizations at L = "
        << config.params.half_length << '\n';
    EnsembleResult result;
    const auto dir = run_and_persist(config, &result);
    err << "droplet_lab: " << result.realizations.size() - static_cast<std::size_t>(result.failures)
        << " realizations ok, " << result.failures << " failed, " << result.wall_seconds << " s\n";
    for (const auto& rec : result.realizations) {
      if (!rec.ok) err << "droplet_lab: realization " << rec.index << " failed: " << rec.error << '\n';
    }
    out << dir.string() << '\n';
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace droplet::cli
