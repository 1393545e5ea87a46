#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "etpa/analysis.hpp"
#include "etpa/config.hpp"
#include "etpa/io.hpp"

namespace etpa {

// Stateless seed derivation; every random stream in a run descends from the
// single config seed through these.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Everything needed to synthesize and analyze one pump setting.
struct PumpRun {
  PumpConfig pump;
  LevelSystem system;
  SourceConfig source;
  DelayGrid grid;
};

// Resolves the config into per-pump runs, checking all cross-field
// invariants (resonance, virtual-state guard, grid feasibility, resolution
// versus bandwidth). Throws ConfigError with a field diagnostic on failure.
std::vector<PumpRun> plan_runs(const ExperimentConfig& cfg,
                               bool override_resolution_check = false);

// Simulate one pump setting and analyze its spectrum.
PeakSet scan_peaks(const PumpRun& run, const ScanSpec& scan,
                   const AnalysisSpec& analysis, const NoiseSpec& noise,
                   Spectrum* out_spectrum = nullptr, DelayTrace* out_trace = nullptr);

// simulate: per-pump trace.csv / spectrum.csv / spectrum.svg under out_dir.
void run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                  bool override_resolution_check = false);

// extract: full two-or-more-pump pipeline; writes the per-pump artifacts plus
// match_report.json and summary.txt, and returns the recovered energies.
ExtractionResult run_extract(const ExperimentConfig& cfg,
                             const std::filesystem::path& out_dir,
                             bool override_resolution_check = false);

// sweep: seeded Monte Carlo over the sweep axes; writes sweep.csv with one
// row per cell. The trailing runtime_s column is wall-clock and is the only
// non-deterministic output field.
void run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
               bool override_resolution_check = false);

// Draws n intermediate energies in [e_min, e_max] such that at every pump the
// predicted positive-side lines stay clear of DC, are pairwise separated by
// at least min_separation, every detuning clears min_detuning, and no
// detuning changes sign across pumps. Throws after max_tries rejections.
std::vector<double> draw_intermediates(std::mt19937_64& rng, int n, double e_min,
                                       double e_max,
                                       const std::vector<double>& pump_omega0,
                                       double min_line_freq, double min_separation,
                                       double min_detuning, int max_tries = 20000);

}  // namespace etpa
