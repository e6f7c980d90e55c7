// Command-line driver: `cmnl run` for one configuration, `cmnl compare` for
// several configurations joined on t.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmnl/config.hpp"
#include "cmnl/experiment.hpp"
#include "cmnl/report.hpp"

namespace fs = std::filesystem;
using namespace cmnl;

namespace {

struct Overrides {
  std::string policy;
  std::optional<std::size_t> T;
  std::string seeds;
  std::optional<std::size_t> jobs;
  std::string out;
  std::vector<std::string> settings;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_policy) {
  if (with_policy) cmd->add_option("--policy", o.policy, "Policy override");
  cmd->add_option("--T", o.T, "Horizon override");
  cmd->add_option("--seeds", o.seeds, "Seed list, e.g. 1,2,3 or 0..9");
  cmd->add_option("--jobs", o.jobs, "Seeds run in parallel");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--set", o.settings, "Extra key=value override (repeatable)");
}

ExperimentConfig resolve(const std::string& path, const Overrides& o) {
  ExperimentConfig config = load_config(path);
  if (!o.policy.empty()) apply_setting(config, "policy", o.policy);
  if (o.T) config.T = *o.T;
  if (!o.seeds.empty()) apply_setting(config, "seeds", o.seeds);
  if (o.jobs) config.jobs = *o.jobs;
  if (!o.out.empty()) config.out_dir = o.out;
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

/// Runs and writes <out>/<name>.csv and .json; returns false on any failed seed.
bool execute(const ExperimentConfig& config, RunResult& run) {
  run = run_experiment(config);
  fs::create_directories(config.out_dir);
  const fs::path base = fs::path(config.out_dir) / config.name;
  write_csv(run.records(), base.string() + ".csv");
  write_sidecar(run, base.string() + ".json");

  bool ok = true;
  for (const auto& r : run.replications) {
    if (!r.ok) {
      std::cerr << config.name << ": seed " << r.seed << " failed: " << r.error << '\n';
      ok = false;
    }
  }
  const auto summary = aggregate(run.records());
  if (!summary.empty()) {
    const auto& last = summary.back();
    std::cout << config.name << " [" << to_string(config.policy) << "] T=" << last.t
              << " seeds=" << last.n << " mean cum regret=" << last.mean_cum_regret
              << " (std " << last.std_cum_regret << "), " << run.wall_seconds << " s -> "
              << base.string() << ".csv\n";
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual MNL pricing and assortment simulations"};
  app.require_subcommand(1);

  Overrides run_opts;
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment configuration");
  run_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_overrides(run_cmd, run_opts, true);

  Overrides cmp_opts;
  std::vector<std::string> config_paths;
  std::string joined_name = "compare";
  auto* cmp_cmd = app.add_subcommand("compare", "Run several configurations and join their summaries");
  cmp_cmd->add_option("--configs", config_paths, "Config files")
      ->required()
      ->expected(2, -1)
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("--name", joined_name, "Base name of the joined CSV");
  add_overrides(cmp_cmd, cmp_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      RunResult run;
      return execute(resolve(config_path, run_opts), run) ? 0 : 1;
    }

    bool ok = true;
    std::vector<LabeledSummary> summaries;
    std::string out_dir;
    for (const auto& path : config_paths) {
      const ExperimentConfig config = resolve(path, cmp_opts);
      if (out_dir.empty()) out_dir = config.out_dir;
      RunResult run;
      ok = execute(config, run) && ok;
      std::string label = config.name;
      for (const auto& s : summaries) {
        if (s.label == label) label += "_" + std::to_string(summaries.size());
      }
      summaries.push_back({label, aggregate(run.records())});
    }
    fs::create_directories(out_dir);
    const auto joined = (fs::path(out_dir) / (joined_name + ".csv")).string();
    write_joined_summary(summaries, joined);
    std::cout << "joined summary -> " << joined << '\n';
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
