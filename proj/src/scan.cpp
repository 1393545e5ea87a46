#include "etpa/scan.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <random>
#include <stdexcept>

namespace etpa {

namespace {

constexpr std::size_t kMinGridSamples = 16;

// FFTW plan creation/destruction is not thread safe; execution is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>> real_dft(std::vector<double>& in) {
  const std::size_t n = in.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("spectrum: FFTW planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<double> DelayGrid::samples() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = tau(k);
  return out;
}

DelayGrid make_grid(double delta_tau_fs, double te_fs, double margin) {
  if (!(delta_tau_fs > 0.0))
    throw std::invalid_argument("make_grid: delta_tau must be positive");
  if (!(margin > 0.0) || margin > 1.0)
    throw std::invalid_argument("make_grid: margin must be in (0, 1]");
  if (!(te_fs > 0.0))
    throw std::invalid_argument("make_grid: T_e must be positive");
  auto half = static_cast<long long>(
      std::floor(margin * te_fs / delta_tau_fs + 1e-9));
  // tau_max must stay strictly below T_e
  while (half > 0 && static_cast<double>(half) * delta_tau_fs >= te_fs) --half;
  DelayGrid grid{delta_tau_fs, static_cast<std::size_t>(std::max(half, 0LL))};
  if (grid.size() < kMinGridSamples)
    throw std::invalid_argument(
        "make_grid: insufficient scan range (fewer than 16 samples)");
  return grid;
}

double mirror_step(double delta_tau_fs) {
  if (!(delta_tau_fs > 0.0))
    throw std::domain_error("mirror_step: delta_tau must be positive");
  return kSpeedOfLightNmFs * delta_tau_fs / 2.0;
}

double frequency_resolution(const DelayGrid& grid) {
  if (!(grid.span() > 0.0))
    throw std::invalid_argument("frequency_resolution: empty grid span");
  return 2.0 * kPi * kHbarEvFs / grid.span();
}

bool resolution_bound_satisfied(double omega_res_eV, double delta_omega_eV) {
  return omega_res_eV > delta_omega_eV / (2.0 * kPi);
}

DelayTrace simulate_trace(const LevelSystem& sys, const SourceConfig& src,
                          const DelayGrid& grid, const NoiseSpec& noise) {
  if (!(grid.delta_tau > 0.0))
    throw std::invalid_argument("simulate_trace: invalid grid");
  if (!(grid.tau_max() < src.T_e))
    throw std::invalid_argument("simulate_trace: grid exceeds the entanglement time");
  if (!PumpConfig(src.omega0).resonant_with(sys))
    throw std::invalid_argument(
        "simulate_trace: two-photon resonance violated for this pump");

  const DetuningSet d = detunings(sys, PumpConfig(src.omega0));
  DelayTrace trace;
  trace.grid = grid;
  trace.values.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    trace.values[k] = cross_section(d, src.T_e, grid.tau(k));

  if (noise.counts_budget) {
    const double budget = *noise.counts_budget;
    if (!(budget > 0.0))
      throw std::invalid_argument("simulate_trace: counts_budget must be positive");
    const double peak = *std::max_element(trace.values.begin(), trace.values.end());
    if (peak > 0.0) {
      const double scale = budget / peak;
      std::mt19937_64 rng(noise.seed);
      for (double& v : trace.values) {
        std::poisson_distribution<long long> poisson(v * scale);
        v = static_cast<double>(poisson(rng)) / scale;
      }
    }
    trace.counts_budget = budget;
    trace.noise_seed = noise.seed;
  }
  return trace;
}

Spectrum spectrum(const DelayTrace& trace, const SpectrumOptions& opts) {
  const std::size_t n = trace.values.size();
  if (n == 0 || n != trace.grid.size())
    throw std::invalid_argument("spectrum: trace length does not match its grid");
  if (!(trace.grid.delta_tau > 0.0))
    throw std::invalid_argument("spectrum: grid step must be positive");

  std::vector<double> x = trace.values;
  if (opts.subtract_mean) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : x) v -= mean;
  }
  if (opts.window == SpectrumOptions::Window::Hann && n > 1) {
    for (std::size_t k = 0; k < n; ++k)
      x[k] *= 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(k) /
                                    static_cast<double>(n - 1)));
  }

  const auto fft = real_dft(x);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));

  Spectrum sp;
  sp.omega_res = 2.0 * kPi * kHbarEvFs /
                 (static_cast<double>(n) * trace.grid.delta_tau);
  sp.omega_max = kPi * kHbarEvFs / trace.grid.delta_tau;
  sp.dc_suppressed = opts.subtract_mean;
  sp.frequencies.resize(n);
  sp.magnitudes.resize(n);

  // Bins k in [-floor(N/2), ...]; for odd N the axis is exactly symmetric.
  const long long kmin = -static_cast<long long>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const long long k = kmin + static_cast<long long>(i);
    sp.frequencies[i] = static_cast<double>(k) * sp.omega_res;
    sp.magnitudes[i] = std::abs(fft[static_cast<std::size_t>(std::llabs(k))]) * norm;
    if (k == 0) sp.dc_index = i;
  }
  return sp;
}

}  // namespace etpa
