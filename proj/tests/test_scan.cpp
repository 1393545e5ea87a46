#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "etpa/pipeline.hpp"
#include "etpa/scan.hpp"

using namespace etpa;

namespace {

LevelSystem two_state_system() { return LevelSystem(0.0, {{0.86}, {1.67}}, 3.06); }

SourceConfig reference_source(double omega0 = 1.53) {
  return SourceConfig::from_bandwidth(omega0, 0.0074);
}

}  // namespace

TEST_CASE("grid construction matches the reference scan parameters") {
  const DelayGrid grid = make_grid(0.3, 1745.0, 0.99);
  CHECK(grid.tau_max() == doctest::Approx(1727.4).epsilon(1e-9));
  CHECK(grid.size() == 11517);
  CHECK(grid.tau_min() == doctest::Approx(-1727.4).epsilon(1e-9));
}

TEST_CASE("grids with fewer than 16 samples are rejected") {
  CHECK_THROWS_WITH_AS(make_grid(0.3, 2.0, 0.99),
                       doctest::Contains("insufficient scan range"),
                       std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.0, 1745.0, 0.99), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.3, 1745.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.3, 1745.0, 1.5), std::invalid_argument);
}

TEST_CASE("grid samples are symmetric about zero delay") {
  const DelayGrid grid = make_grid(0.5, 100.0, 0.9);
  const auto samples = grid.samples();
  for (std::size_t k = 0; k < samples.size(); ++k)
    CHECK(samples[k] == -samples[samples.size() - 1 - k]);
  CHECK(grid.tau_max() < 100.0);
}

TEST_CASE("mirror step for the reference delay step is 45 nm") {
  CHECK(std::abs(mirror_step(0.3) - 44.97) < 0.1);
  CHECK(mirror_step(0.6) == doctest::Approx(2.0 * mirror_step(0.3)));
  CHECK_THROWS_AS(mirror_step(0.0), std::domain_error);
}

TEST_CASE("frequency resolution follows 2 pi hbar over the scan span") {
  const DelayGrid grid = make_grid(0.3, 1745.0, 0.99);
  CHECK(grid.span() == doctest::Approx(3454.8).epsilon(1e-12));
  const double res = frequency_resolution(grid);
  CHECK(std::abs(res - 0.0011971) < 1e-6);
  const DelayGrid doubled = make_grid(0.3, 2.0 * 1745.0, 0.99);
  CHECK(frequency_resolution(doubled) == doctest::Approx(res / 2.0).epsilon(1e-3));
}

TEST_CASE("bandwidth bound on the achievable resolution") {
  // any grid confined to |tau| < T_e respects the bound
  const double dw = 0.0074;
  const double te = entanglement_time_from_bandwidth(dw);
  const DelayGrid grid = make_grid(0.3, te, 0.99);
  CHECK(resolution_bound_satisfied(frequency_resolution(grid), dw));
  // a span beyond 2 T_e would claim resolution below the bound
  CHECK_FALSE(resolution_bound_satisfied(dw / (2.0 * kPi) * 0.5, dw));
}

TEST_CASE("spectrum of a pure cosine peaks at the line frequency") {
  const DelayGrid grid = make_grid(0.3, 300.0, 0.99);
  DelayTrace trace;
  trace.grid = grid;
  trace.values.resize(grid.size());
  const double line = 0.14;
  for (std::size_t k = 0; k < grid.size(); ++k)
    trace.values[k] = std::cos(phase_rad(line, grid.tau(k)));
  const Spectrum sp = spectrum(trace);

  // strongest positive-side bin within one bin of the line
  std::size_t best = sp.dc_index + 1;
  for (std::size_t i = sp.dc_index + 1; i < sp.magnitudes.size(); ++i)
    if (sp.magnitudes[i] > sp.magnitudes[best]) best = i;
  CHECK(std::abs(sp.frequencies[best] - line) <= sp.omega_res);
  // and mirrored on the negative side
  const std::size_t mirror = sp.frequencies.size() - 1 - best;
  CHECK(sp.magnitudes[mirror] == doctest::Approx(sp.magnitudes[best]));
}

TEST_CASE("Hann windowing keeps line positions and tames the skirt") {
  const DelayGrid grid = make_grid(0.3, 300.0, 0.99);
  DelayTrace trace;
  trace.grid = grid;
  trace.values.resize(grid.size());
  const double line = 0.35;
  for (std::size_t k = 0; k < grid.size(); ++k)
    trace.values[k] = std::cos(phase_rad(line, grid.tau(k)));

  SpectrumOptions opts;
  opts.window = SpectrumOptions::Window::Hann;
  const Spectrum windowed = spectrum(trace, opts);
  const Spectrum plain = spectrum(trace);

  std::size_t best = windowed.dc_index + 1;
  for (std::size_t i = windowed.dc_index + 1; i < windowed.magnitudes.size(); ++i)
    if (windowed.magnitudes[i] > windowed.magnitudes[best]) best = i;
  CHECK(std::abs(windowed.frequencies[best] - line) <= 2.0 * windowed.omega_res);

  // the window suppresses energy a few bins off the line
  const auto skirt = [&](const Spectrum& sp) {
    std::size_t center = 0;
    double top = 0.0;
    for (std::size_t i = sp.dc_index + 1; i < sp.magnitudes.size(); ++i)
      if (sp.magnitudes[i] > top) { top = sp.magnitudes[i]; center = i; }
    return sp.magnitudes[center + 8] / top;
  };
  CHECK(skirt(windowed) < skirt(plain));
}

TEST_CASE("constant trace concentrates in the DC bin") {
  const DelayGrid grid = make_grid(0.3, 60.0, 0.99);
  DelayTrace trace;
  trace.grid = grid;
  trace.values.assign(grid.size(), 2.5);

  SpectrumOptions raw;
  raw.subtract_mean = false;
  const Spectrum sp = spectrum(trace, raw);
  CHECK_FALSE(sp.dc_suppressed);
  CHECK(sp.magnitudes[sp.dc_index] > 1.0);
  for (std::size_t i = 0; i < sp.magnitudes.size(); ++i)
    if (i != sp.dc_index) CHECK(sp.magnitudes[i] < 1e-12);

  const Spectrum suppressed = spectrum(trace);
  CHECK(suppressed.dc_suppressed);
  for (double m : suppressed.magnitudes) CHECK(m < 1e-12);
}

TEST_CASE("unitary normalization satisfies Parseval") {
  const auto sys = two_state_system();
  const auto src = reference_source();
  const DelayGrid grid = make_grid(0.3, src.T_e, 0.5);
  NoiseSpec noise;
  noise.counts_budget = 1e5;
  noise.seed = 99;
  const DelayTrace trace = simulate_trace(sys, src, grid, noise);
  const Spectrum sp = spectrum(trace);

  double mean = 0.0;
  for (double v : trace.values) mean += v;
  mean /= static_cast<double>(trace.values.size());
  double time_sum = 0.0;
  for (double v : trace.values) time_sum += (v - mean) * (v - mean);
  double freq_sum = 0.0;
  for (double m : sp.magnitudes) freq_sum += m * m;
  CHECK(std::abs(time_sum - freq_sum) <= 1e-9 * time_sum);
}

TEST_CASE("no reported frequency exceeds the Nyquist limit") {
  const DelayGrid grid = make_grid(0.3, 200.0, 0.99);
  DelayTrace trace;
  trace.grid = grid;
  trace.values.assign(grid.size(), 1.0);
  const Spectrum sp = spectrum(trace);
  CHECK(sp.omega_max == doctest::Approx(kPi * kHbarEvFs / 0.3));
  for (double f : sp.frequencies) CHECK(std::abs(f) <= sp.omega_max + 1e-12);
}

TEST_CASE("noiseless spectrum magnitudes are even in frequency") {
  const auto sys = two_state_system();
  const auto src = reference_source();
  const DelayGrid grid = make_grid(0.3, src.T_e, 0.99);
  const Spectrum sp = spectrum(simulate_trace(sys, src, grid));
  double max_mag = 0.0;
  for (double m : sp.magnitudes) max_mag = std::max(max_mag, m);
  const std::size_t n = sp.magnitudes.size();
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(sp.magnitudes[i] - sp.magnitudes[n - 1 - i]) <=
          1e-9 * max_mag);
}

TEST_CASE("noiseless trace is even about zero delay") {
  const auto sys = two_state_system();
  const auto src = reference_source();
  const DelayGrid grid = make_grid(0.3, src.T_e, 0.99);
  const DelayTrace trace = simulate_trace(sys, src, grid);
  const std::size_t n = trace.values.size();
  double peak = *std::max_element(trace.values.begin(), trace.values.end());
  for (std::size_t k = 0; k < n; ++k)
    CHECK(std::abs(trace.values[k] - trace.values[n - 1 - k]) <= 1e-12 * peak);
}

TEST_CASE("trace synthesis guards its preconditions") {
  const auto sys = two_state_system();
  const auto src = reference_source();
  DelayGrid too_long{0.3, static_cast<std::size_t>(src.T_e / 0.3) + 10};
  CHECK_THROWS_AS(simulate_trace(sys, src, too_long), std::invalid_argument);
  const LevelSystem detached(0.0, {{0.86}}, 2.90);
  CHECK_THROWS_AS(
      simulate_trace(detached, src, make_grid(0.3, src.T_e, 0.5)),
      std::invalid_argument);
}

TEST_CASE("fixed seed reproduces the noisy trace bit for bit") {
  const auto sys = two_state_system();
  const auto src = reference_source();
  const DelayGrid grid = make_grid(0.3, src.T_e, 0.3);
  NoiseSpec noise;
  noise.counts_budget = 1e4;
  noise.seed = 1234;
  const DelayTrace a = simulate_trace(sys, src, grid, noise);
  const DelayTrace b = simulate_trace(sys, src, grid, noise);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t k = 0; k < a.values.size(); ++k)
    CHECK(a.values[k] == b.values[k]);

  noise.seed = 1235;
  const DelayTrace c = simulate_trace(sys, src, grid, noise);
  std::size_t differing = 0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    if (a.values[k] != c.values[k]) ++differing;
  CHECK(differing > 0);
}

TEST_CASE("larger counts budgets concentrate on the noiseless trace") {
  const auto sys = two_state_system();
  const auto src = reference_source();
  const DelayGrid grid = make_grid(0.3, src.T_e, 0.3);
  const DelayTrace clean = simulate_trace(sys, src, grid);
  const double scale = *std::max_element(clean.values.begin(), clean.values.end());

  const auto rel_rms = [&](double budget) {
    NoiseSpec noise;
    noise.counts_budget = budget;
    noise.seed = 7;
    const DelayTrace noisy = simulate_trace(sys, src, grid, noise);
    double ss = 0.0;
    for (std::size_t k = 0; k < clean.values.size(); ++k) {
      const double diff = noisy.values[k] - clean.values[k];
      ss += diff * diff;
    }
    return std::sqrt(ss / static_cast<double>(clean.values.size())) / scale;
  };
  const double coarse = rel_rms(1e4);
  const double fine = rel_rms(1e8);
  CHECK(fine < coarse);
  CHECK(fine < 1e-3);
}

TEST_CASE("median peak-position error decreases with the counts budget") {
  const auto sys = two_state_system();
  SourceConfig src(1.53, 0.0074, 200.0);
  const DelayGrid grid = make_grid(0.3, src.T_e, 0.99);

  // statistical position error, referenced to the noiseless sub-bin estimate
  // so the deterministic interpolation bias cancels
  const Spectrum clean = spectrum(simulate_trace(sys, src, grid));
  const PeakSet clean_peaks = detect_peaks(clean, 0.05, 3.0 * clean.omega_res, 1.53);
  double reference = 0.0;
  for (const auto& p : clean_peaks.peaks)
    if (std::abs(p.frequency - 0.14) < 0.01) reference = p.frequency;
  REQUIRE(reference != 0.0);

  const auto median_error = [&](double budget) {
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      NoiseSpec noise;
      noise.counts_budget = budget;
      noise.seed = mix_seed(2024, seed);
      const Spectrum sp = spectrum(simulate_trace(sys, src, grid, noise));
      const PeakSet peaks = detect_peaks(sp, 0.05, 3.0 * sp.omega_res, 1.53);
      double best = 10.0 * sp.omega_res;  // penalty when the line is missed
      for (const auto& p : peaks.peaks)
        best = std::min(best, std::abs(p.frequency - reference));
      errors.push_back(best);
    }
    std::sort(errors.begin(), errors.end());
    return errors[errors.size() / 2];
  };

  const double low = median_error(1e2);
  const double mid = median_error(1e4);
  const double high = median_error(1e6);
  CHECK(mid <= low);
  CHECK(high <= mid);
  CHECK(high < 0.1 * frequency_resolution(grid));
}

TEST_CASE("noiseless spectral maxima all lie on predicted lines") {
  std::mt19937_64 rng(31);
  const double omega0 = 1.53;
  const auto src = reference_source(omega0);
  const DelayGrid grid = make_grid(0.3, src.T_e, 0.99);
  const double bin =
      2.0 * kPi * kHbarEvFs / (static_cast<double>(grid.size()) * 0.3);

  for (int trial = 0; trial < 5; ++trial) {
    const auto energies = draw_intermediates(rng, 2, 0.4, 2.4, {omega0},
                                             4.0 * bin, 3.0 * bin, 0.02);
    std::vector<Intermediate> levels;
    for (double e : energies) levels.push_back({e, 1.0, 1.0});
    const LevelSystem sys(0.0, levels, 2.0 * omega0);
    const Spectrum sp = spectrum(simulate_trace(sys, src, grid));
    const PeakSet peaks = detect_peaks(sp, 0.01, 3.0 * bin, omega0);
    CHECK(peaks.peaks.size() >= 4);

    const auto lines = predicted_frequencies(detunings(sys, PumpConfig(omega0)));
    for (const auto& p : peaks.peaks) {
      double best = 1e9;
      for (double f : lines) best = std::min(best, std::abs(p.frequency - f));
      CHECK(best <= bin);
    }
  }
}
