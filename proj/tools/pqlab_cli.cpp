#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pqlab/config.hpp"
#include "pqlab/error.hpp"
#include "pqlab/experiment.hpp"

namespace fs = std::filesystem;

namespace {

// A bare name such as "prop2_sharpness" refers to a bundled config.
std::string resolve_config(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const std::string name : {arg, arg + ".ini"}) {
    const fs::path bundled = fs::path(PQLAB_CONFIG_DIR) / name;
    if (fs::exists(bundled)) return bundled.string();
  }
  return arg;
}

int list_experiments() {
  std::cout << "experiment kinds:\n";
  for (const auto& kind : pqlab::experiment_kinds()) std::cout << "  " << kind << "\n";
  std::cout << "bundled configs (" << PQLAB_CONFIG_DIR << "):\n";
  std::vector<fs::path> configs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(PQLAB_CONFIG_DIR, ec)) {
    if (entry.path().extension() == ".ini") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  for (const auto& path : configs) {
    try {
      const auto c = pqlab::load_config(path.string());
      std::cout << "  " << path.stem().string() << "  [" << c.kind << "] " << c.name << "\n";
    } catch (const pqlab::Error& e) {
      std::cout << "  " << path.stem().string() << "  (unreadable: " << e.what() << ")\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for (p,q)-growth variational problems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<int> workers, resolution;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--workers", workers, "Worker threads for independent instances")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides [output] directory)");
  app.add_option("--seed", seed, "Random seed (overrides [experiment] seed)");
  app.add_option("--resolution", resolution, "Single grid resolution n (overrides [resolution] n)");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("config", config_path, "Config file or bundled config name")->required();
  auto* validate_cmd = app.add_subcommand("validate", "Check a config and print diagnostics");
  validate_cmd->add_option("config", config_path, "Config file or bundled config name")->required();
  auto* list_cmd = app.add_subcommand("list-experiments", "List experiment kinds and bundled configs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) return list_experiments();

    pqlab::ExperimentConfig config = pqlab::load_config(resolve_config(config_path));
    if (workers) config.workers = *workers;
    if (seed) config.seed = *seed;
    if (resolution) config.resolutions = {*resolution};
    if (out_dir) config.output_dir = *out_dir;

    const auto diagnostics = pqlab::validate(config);
    if (validate_cmd->parsed()) {
      for (const auto& d : diagnostics) std::cout << d.field << ": " << d.message << "\n";
      if (diagnostics.empty()) std::cout << config.source << ": ok\n";
      return diagnostics.empty() ? 0 : 2;
    }
    if (!diagnostics.empty()) {
      for (const auto& d : diagnostics) std::cerr << d.field << ": " << d.message << "\n";
      return 2;
    }

    pqlab::RunResult result = pqlab::run(config);
    pqlab::emit(result, config.output_dir);
    for (const auto& line : result.summary) std::cout << line << "\n";
    for (const auto& v : result.verdicts) {
      std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
    }
    for (const auto& s : result.instances) {
      if (s.status != "ok") std::cout << "instance " << s.key << ": " << s.status << "\n";
    }
    std::cout << "wrote " << result.files.size() << " files to " << config.output_dir << "\n";
    return result.ok() ? 0 : 1;
  } catch (const pqlab::Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == pqlab::ErrorKind::ConfigInvalid ? 2 : 3;
  }
}
