#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "etpa/level_system.hpp"
#include "etpa/scan.hpp"
#include "etpa/signal_model.hpp"

namespace etpa {

// Configuration problems map to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemSpec {
  double epsilon_i = 0.0;
  std::vector<Intermediate> intermediates;
  // When absent the final level is pinned to exact two-photon resonance
  // epsilon_i + 2 omega0 for every pump setting (final-state band picture).
  std::optional<double> epsilon_f;
};

// Pump settings, given either as wavelengths or directly as center
// frequencies. Exactly one representation is active; it is preserved on
// serialization.
struct PumpSpec {
  std::vector<double> wavelengths_nm;
  std::vector<double> omega0_eV;
  std::vector<double> omega0_list() const;
};

struct SourceSpec {
  double delta_omega = 0.0074;  // eV
  BandwidthConvention convention = BandwidthConvention::PlanckH;
  std::optional<double> te_override_fs;
  std::optional<CrystalParams> crystal;
  double photon_flux = 0.0;
};

struct ScanSpec {
  double delta_tau = 0.3;  // fs
  double margin = 0.99;
  bool subtract_mean = true;
  SpectrumOptions::Window window = SpectrumOptions::Window::None;
};

struct NoiseConfig {
  std::optional<double> counts_budget;  // absent = noiseless
  std::uint64_t seed = 1;
};

struct AnalysisSpec {
  double min_prominence = 0.01;
  double dc_exclusion_bins = 3.0;
  double match_tol_bins = 2.0;
  double slope_tolerance = 0.25;
  std::size_t guess_cap = 10000;
  double min_detuning = kDefaultMinDetuning;   // eV
  double resonance_tol = kDefaultResonanceTol; // eV
};

// Monte Carlo sweep over experiment parameters; empty axes fall back to the
// base config value.
struct SweepSpec {
  std::vector<double> delta_omega_eV;
  std::vector<double> delta_tau_fs;
  std::vector<std::optional<double>> counts_budget;
  std::vector<int> n_intermediates;  // 0 = the configured system
  std::vector<int> n_pumps;
  int systems_per_cell = 20;
  double energy_min = 0.4;  // eV, random-system draw range
  double energy_max = 2.4;  // eV
  double min_separation_bins = 3.0;
  std::size_t cell_cap = 10000;
};

struct ExperimentConfig {
  int schema_version = 1;
  SystemSpec system;
  PumpSpec pumps;
  SourceSpec source;
  ScanSpec scan;
  NoiseConfig noise;
  AnalysisSpec analysis;
  std::optional<SweepSpec> sweep;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical serialized form: every field explicit, keys sorted. Identical
// configs serialize to identical bytes; parse round-trips exactly.
std::string config_to_json_text(const ExperimentConfig& cfg, int indent = 2);

// FNV-1a hash of the canonical form, embedded in every output file.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace etpa
