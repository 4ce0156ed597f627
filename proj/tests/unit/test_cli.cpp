#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "droplet/error.hpp"
#include "droplet_cli/cli.hpp"

using namespace droplet;
using namespace droplet::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "droplet_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = parse_and_run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Precedence, CommandLineBeatsFileBeatsEnvironmentBeatsPreset) {
  const fs::path cfg = write_config("droplet_prec.toml", "seed = 5\nrealizations = 7\n[chain]\nL = 4\n");
  Overrides o;
  ExperimentConfig base = resolve_config("dl-decay", o, nullptr);
  EXPECT_EQ(base.out, "out");
  EXPECT_EQ(resolve_config("dl-decay", o, "/env/out").out, "/env/out");

  o.config = cfg.string();
  ExperimentConfig file = resolve_config("dl-decay", o, "/env/out");
  EXPECT_EQ(file.seed, 5u);
  EXPECT_EQ(file.realizations, 7u);
  EXPECT_EQ(file.params.half_length, 4);
  EXPECT_EQ(file.schedule, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(file.params.delta, base.params.delta);
  EXPECT_EQ(file.out, "/env/out");

  o.seed = 11;
  o.out = "/cli/out";
  ExperimentConfig cli = resolve_config("dl-decay", o, "/env/out");
  EXPECT_EQ(cli.seed, 11u);
  EXPECT_EQ(cli.realizations, 7u);
  EXPECT_EQ(cli.out, "/cli/out");
  fs::remove(cfg);
}

TEST(Precedence, FileOutputDirectoryBeatsEnvironment) {
  const fs::path cfg = write_config("droplet_out.toml", "out = \"/file/out\"\n");
  Overrides o;
  o.config = cfg.string();
  EXPECT_EQ(resolve_config("lr", o, "/env/out").out, "/file/out");
  fs::remove(cfg);
}

TEST(Toml, RejectsUnknownKeysAndWrongTypes) {
  ExperimentConfig c = preset("lr");
  EXPECT_THROW(apply_toml(c, "bogus = 1\n", "t.toml"), ConfigError);
  EXPECT_THROW(apply_toml(c, "[chain]\nwidth = 3\n", "t.toml"), ConfigError);
  EXPECT_THROW(apply_toml(c, "seed = \"x\"\n", "t.toml"), ConfigError);
  EXPECT_THROW(apply_toml(c, "experiment = \"cluster\"\n", "t.toml"), ConfigError);
  EXPECT_THROW(apply_toml(c, "seed = [\n", "t.toml"), ConfigError);
  EXPECT_NO_THROW(apply_toml(c, "experiment = \"lr\"\n[windows]\nk = [0.75, 0.9]\n", "t.toml"));
  ASSERT_TRUE(c.k_window.has_value());
  EXPECT_EQ(c.k_window->second, 0.9);
}

TEST(Cli, DryRunPrintsResolvedWindows) {
  const Outcome r = run({"dl-decay", "--dry-run", "--L", "5", "--seed", "3"});
  EXPECT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["params"]["L"], 5);
  EXPECT_DOUBLE_EQ(j["windows"]["droplet"]["hi"].get<double>(), 1.125);
}

TEST(Cli, ConfigurationErrorsExitWithTwo) {
  EXPECT_EQ(run({"no-such-experiment"}).code, kExitConfig);
  EXPECT_EQ(run({}).code, kExitConfig);
  const Outcome missing = run({"lr", "--config", "/nonexistent/config.toml", "--dry-run"});
  EXPECT_EQ(missing.code, kExitConfig);
  EXPECT_NE(missing.err.find("/nonexistent/config.toml"), std::string::npos);
  const fs::path cfg = write_config("droplet_bad.toml", "colour = 1\n");
  EXPECT_EQ(run({"lr", "--config", cfg.string(), "--dry-run"}).code, kExitConfig);
  fs::remove(cfg);
  EXPECT_EQ(run({"lr", "--delta", "0.5", "--dry-run"}).code, kExitConfig);
  EXPECT_EQ(run({"lr", "--realizations", "many"}).code, kExitConfig);
  // An explicit schedule is not trimmed.
  const fs::path sched = write_config("droplet_sched.toml", "schedule = [1, 2, 3]\n[chain]\nL = 2\n");
  EXPECT_EQ(run({"dl-decay", "--config", sched.string(), "--dry-run"}).code, kExitConfig);
  fs::remove(sched);
}

TEST(Cli, WindowRulesAreEnforcedAtTheBoundary) {
  const fs::path above = write_config("droplet_above.toml", "[windows]\nabove = [1.5, 2.5]\n");
  EXPECT_EQ(run({"optimality", "--config", above.string(), "--dry-run"}).code, kExitOk);
  const fs::path k = write_config("droplet_k.toml", "[windows]\nk = [0.75, 1.6]\n");
  const Outcome r = run({"cluster", "--config", k.string(), "--dry-run"});
  EXPECT_EQ(r.code, kExitConfig);
  fs::remove(above);
  fs::remove(k);
}

TEST(Cli, SmallRunWritesOutputDirectory) {
  const fs::path root = fs::temp_directory_path() / "droplet_cli_run";
  fs::remove_all(root);
  const fs::path cfg = write_config("droplet_small.toml", "schedule = [1, 2]\n[chain]\nL = 2\n");
  const Outcome r = run({"dl-decay", "--config", cfg.string(), "--realizations", "2", "--out", root.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::string dir = r.out;
  while (!dir.empty() && dir.back() == '\n') dir.pop_back();
  EXPECT_TRUE(fs::exists(fs::path(dir) / "data.csv"));
  EXPECT_TRUE(fs::exists(fs::path(dir) / "manifest.json"));
  fs::remove_all(root);
  fs::remove(cfg);
}
