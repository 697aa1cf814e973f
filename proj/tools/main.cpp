// polyfilter: run, validate and summarize virtual identification experiments.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "polyfilter/config.hpp"
#include "polyfilter/experiment.hpp"
#include "polyfilter/text_io.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> filter;
};

polyfilter::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto cfg = polyfilter::load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.filter) polyfilter::apply_filter_override(cfg, *o.filter);
  polyfilter::validate(cfg);
  return cfg;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Root seed (overrides experiment.seed)");
  cmd->add_option("--out", o.out, "Output directory (overrides experiment.output)");
  cmd->add_option("--filter", o.filter, "lbu, nlbu2, general:<n> or enkf[:<members>]");
}

int summarize(const std::filesystem::path& dir) {
  const auto report = polyfilter::read_csv(dir / "report.csv");
  const auto cycle = report.column("cycle");
  const auto forecast = report.column("forecast_trace");
  const auto posterior = report.column("posterior_trace");
  const auto rms = report.column("rms_error");
  const auto cond = report.column("condition_number");
  std::cout << std::left << std::setw(7) << "cycle" << std::setw(18) << "forecast_trace" << std::setw(18)
            << "posterior_trace" << std::setw(18) << "rms_error" << "condition\n";
  for (const auto& row : report.rows)
    std::cout << std::setw(7) << row[cycle] << std::setw(18) << row[forecast] << std::setw(18) << row[posterior]
              << std::setw(18) << row[rms] << row[cond] << '\n';
  std::cout << report.rows.size() << " cycles";
  if (std::filesystem::exists(dir / "diagnostics.csv")) {
    const auto diag = polyfilter::read_csv(dir / "diagnostics.csv");
    const auto pinv = diag.column("pseudo_inverse");
    std::size_t flagged = 0;
    for (const auto& row : diag.rows) flagged += row[pinv] == "1";
    std::cout << ", " << flagged << " pseudo-inverse fallbacks";
  }
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-free Bayesian updates with polynomial chaos expansions"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
  run->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  add_overrides(run, overrides);

  auto* check = app.add_subcommand("validate", "Check a config file without running it");
  check->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  add_overrides(check, overrides);

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Summarize the artifacts of a finished run");
  report->add_option("run-dir", run_dir, "Directory written by 'run'")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = load(config_path, overrides);
      const auto result = polyfilter::run_experiment(cfg);
      std::cout << cfg.id << ": " << result.rows.size() << " cycles, " << result.files.size() << " files in "
                << cfg.output_dir.string() << '\n';
      return 0;
    }
    if (*check) {
      const auto cfg = load(config_path, overrides);
      std::cout << cfg.id << ": ok (" << polyfilter::to_string(cfg.model) << ", "
                << polyfilter::to_string(cfg.filter) << ", " << cfg.cycles << " cycles, seed " << cfg.seed << ")\n";
      return 0;
    }
    return summarize(run_dir);
  } catch (const polyfilter::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
