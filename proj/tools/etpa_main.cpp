#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "etpa/config.hpp"
#include "etpa/io.hpp"
#include "etpa/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool override_resolution_check = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_out) {
  cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
      ->required();
  if (needs_out)
    cmd->add_option("--out", opts.out_dir, "output directory")
        ->capture_default_str();
  cmd->add_option("--seed", opts.seed, "override the config noise seed");
  cmd->add_flag("--override-resolution-check", opts.override_resolution_check,
                "accept scans whose frequency resolution is coarser than the "
                "source bandwidth");
}

etpa::ExperimentConfig load(const CommonOpts& opts) {
  etpa::ExperimentConfig cfg = etpa::load_config(opts.config_path);
  if (opts.seed) cfg.noise.seed = *opts.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Delay-scan simulator and spectral analyzer for entangled two-photon "
      "absorption virtual-state spectroscopy"};
  app.require_subcommand(1);

  CommonOpts simulate_opts, extract_opts, sweep_opts, validate_opts;
  auto* simulate = app.add_subcommand(
      "simulate", "synthesize delay traces and spectra for each pump setting");
  add_common(simulate, simulate_opts, true);
  auto* extract = app.add_subcommand(
      "extract", "recover intermediate-state energies from two or more pumps");
  add_common(extract, extract_opts, true);
  auto* sweep = app.add_subcommand(
      "sweep", "Monte Carlo recovery-rate sweep over experiment parameters");
  add_common(sweep, sweep_opts, true);
  auto* validate = app.add_subcommand(
      "validate-config", "parse and cross-check a config without running");
  add_common(validate, validate_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto cfg = load(simulate_opts);
      etpa::run_simulate(cfg, simulate_opts.out_dir,
                         simulate_opts.override_resolution_check);
      std::cout << "wrote scan artifacts for "
                << cfg.pumps.omega0_list().size() << " pump setting(s) to "
                << simulate_opts.out_dir << "\n";
    } else if (extract->parsed()) {
      const auto cfg = load(extract_opts);
      const auto result = etpa::run_extract(
          cfg, extract_opts.out_dir, extract_opts.override_resolution_check);
      std::cout << "recovered " << result.energies.size()
                << " intermediate-state energy(ies)\n";
      for (const auto& e : result.energies)
        std::cout << "  epsilon = " << etpa::format_double(e.epsilon)
                  << " eV +- " << etpa::format_double(e.uncertainty) << " eV\n";
    } else if (sweep->parsed()) {
      const auto cfg = load(sweep_opts);
      etpa::run_sweep(cfg, sweep_opts.out_dir,
                      sweep_opts.override_resolution_check);
      std::cout << "wrote " << (std::filesystem::path(sweep_opts.out_dir) / "sweep.csv").string()
                << "\n";
    } else if (validate->parsed()) {
      const auto cfg = load(validate_opts);
      const auto runs = etpa::plan_runs(cfg, validate_opts.override_resolution_check);
      std::cout << "config ok: " << runs.size() << " pump setting(s)\n";
      for (const auto& run : runs)
        std::cout << "  omega0 = " << etpa::format_double(run.pump.omega0)
                  << " eV, T_e = " << etpa::format_double(run.source.T_e)
                  << " fs, " << run.grid.size() << " delay samples, omega_res = "
                  << etpa::format_double(etpa::frequency_resolution(run.grid))
                  << " eV\n";
    }
  } catch (const etpa::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitOk;
}
