#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jcarray/experiment.hpp"

namespace fs = std::filesystem;
using namespace jcarray;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<double> horizon;
  std::string output_dir = ".";
  std::string preset_dir = JCARRAY_PRESET_DIR;
};

fs::path resolve(const std::string& arg, const Overrides& o) {
  if (fs::exists(arg)) return arg;
  const fs::path preset = fs::path(o.preset_dir) / (arg + ".json");
  if (fs::exists(preset)) return preset;
  throw IoError(arg + ": no such file or preset");
}

ExperimentConfig load(const std::string& arg, const Overrides& o) {
  ExperimentConfig c = load_config(resolve(arg, o));
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.horizon) c.set_t_max(*o.horizon);
  c.trajectories.base_seed = c.seed;
  c.trajectories.workers = c.workers;
  c.validate();
  return c;
}

void report(const RunSummary& s) {
  std::cout << s.name << " [" << s.engine << "] hash " << s.input_hash << ", " << s.wall_time << " s\n";
  if (s.samples > 0) {
    std::cout << "  t=" << s.final_time << "  z=";
    if (s.final_z) std::cout << *s.final_z;
    else std::cout << "n/a";
    std::cout << '\n';
  }
  if (s.breaks) {
    std::cout << "  " << (s.breaks->stable ? "stable" : "broken");
    if (s.breaks->t_break) std::cout << ", t_break=" << *s.breaks->t_break;
    std::cout << '\n';
  }
  for (const auto& p : s.artifacts) std::cout << "  wrote " << p.string() << '\n';
}

void list_presets(const Overrides& o) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(o.preset_dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto c = load_config(f);
    std::cout << f.stem().string() << "  (" << engine_name(c.engine) << ")  " << c.description << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven-dissipative Jaynes-Cummings array simulator"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_arg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_arg, "Config file or preset name")->required();
    sub->add_option("--seed", o.seed, "Base seed (trajectory k uses seed + k)");
    sub->add_option("--workers", o.workers, "Worker threads, 0 = all cores");
    sub->add_option("--output-dir", o.output_dir, "Directory for CSV/JSON output");
    sub->add_option("--horizon", o.horizon, "Override t_max (sweep horizon for phase_sweep)");
    sub->add_option("--preset-dir", o.preset_dir, "Preset directory");
  };
  auto* run = app.add_subcommand("run", "Run one experiment");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Run a phase_sweep config");
  add_common(sweep);
  auto* boundary = app.add_subcommand("boundary", "Write the analytic stability boundary for a config");
  add_common(boundary);
  auto* presets = app.add_subcommand("presets", "Shipped presets");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "List presets");
  list->add_option("--preset-dir", o.preset_dir, "Preset directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (list->parsed()) {
      list_presets(o);
    } else if (run->parsed()) {
      report(run_experiment(load(config_arg, o), o.output_dir));
    } else if (sweep->parsed()) {
      const auto c = load(config_arg, o);
      if (c.engine != Engine::phase_sweep) throw ValidationError("engine: sweep needs engine = phase_sweep");
      report(run_experiment(c, o.output_dir));
    } else if (boundary->parsed()) {
      report(run_boundary(load(config_arg, o), o.output_dir));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const TruncationError& e) {
    std::cerr << "truncation: " << e.what() << '\n';
    return exit_truncation;
  } catch (const IntegrationError& e) {
    std::cerr << "integration: " << e.what() << '\n';
    return exit_integration;
  } catch (const IoError& e) {
    std::cerr << "io: " << e.what() << '\n';
    return exit_io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_unexpected;
  }
  return exit_ok;
}
