#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "etpa/constants.hpp"
#include "etpa/level_system.hpp"
#include "etpa/signal_model.hpp"

namespace etpa {

// Symmetric uniform delay grid tau_k = (k - half) * delta_tau, k = 0..2*half.
struct DelayGrid {
  double delta_tau = 0.0;  // fs
  std::size_t half = 0;

  std::size_t size() const { return 2 * half + 1; }
  double tau(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(half)) * delta_tau;
  }
  double tau_max() const { return static_cast<double>(half) * delta_tau; }
  double tau_min() const { return -tau_max(); }
  double span() const { return tau_max() - tau_min(); }
  std::vector<double> samples() const;
};

// Largest symmetric grid with tau_max = margin * T_e rounded down to a step
// multiple, kept strictly below T_e (the photons must still overlap).
DelayGrid make_grid(double delta_tau_fs, double te_fs, double margin = 0.99);

// Translation-stage step equivalent of a delay step: Delta_L = c Delta_tau / 2.
double mirror_step(double delta_tau_fs);

// Angular-frequency bin width 2 pi hbar / (tau_max - tau_min), in eV.
double frequency_resolution(const DelayGrid& grid);

// Lower bound on the resolution achievable with photons of the given
// bandwidth: scans are confined to |tau| < T_e, so omega_res stays above
// delta_omega / (2 pi) (both sides in eV, T_e taken in the PlanckH
// convention). Returns false when a grid claims to beat that bound.
bool resolution_bound_satisfied(double omega_res_eV, double delta_omega_eV);

struct NoiseSpec {
  std::optional<double> counts_budget;  // expected pair detections at the trace peak
  std::uint64_t seed = 0;
};

struct DelayTrace {
  DelayGrid grid;
  std::vector<double> values;
  std::optional<double> counts_budget;
  std::optional<std::uint64_t> noise_seed;
};

// Samples the cross section over the grid; optionally applies photon-counting
// (Poisson) noise scaled so the trace peak carries counts_budget expected
// counts. Deterministic for a fixed seed.
DelayTrace simulate_trace(const LevelSystem& sys, const SourceConfig& src,
                          const DelayGrid& grid, const NoiseSpec& noise = {});

struct SpectrumOptions {
  bool subtract_mean = true;  // suppress the uninformative DC line
  enum class Window { None, Hann } window = Window::None;
};

// Magnitude spectrum on symmetric angular-frequency bins in eV. Normalization
// is unitary (1/sqrt(N)), so Parseval holds between the transformed samples
// and the magnitudes.
struct Spectrum {
  std::vector<double> frequencies;  // eV, ascending, symmetric about 0
  std::vector<double> magnitudes;
  double omega_res = 0.0;  // bin spacing 2 pi hbar / (N delta_tau), eV
  double omega_max = 0.0;  // Nyquist limit pi hbar / delta_tau, eV
  std::size_t dc_index = 0;
  bool dc_suppressed = false;
};

Spectrum spectrum(const DelayTrace& trace, const SpectrumOptions& opts = {});

}  // namespace etpa
