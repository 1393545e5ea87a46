#include "etpa/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace etpa {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(base ^ splitmix64(a ^ splitmix64(b ^ 0x5851f42d4c957f2dULL)));
}

namespace {

LevelSystem resonant_system(const SystemSpec& spec, double omega0,
                            double resonance_tol) {
  double epsilon_f = spec.epsilon_i + 2.0 * omega0;
  if (spec.epsilon_f) {
    if (std::abs(*spec.epsilon_f - spec.epsilon_i - 2.0 * omega0) > resonance_tol)
      throw ConfigError(
          "config: system.epsilon_f breaks two-photon resonance for omega0 = " +
          format_double(omega0) + " eV");
    epsilon_f = *spec.epsilon_f;
  }
  return LevelSystem(spec.epsilon_i, spec.intermediates, epsilon_f);
}

SourceConfig make_source(const SourceSpec& spec, double omega0) {
  const double te = spec.te_override_fs
                        ? *spec.te_override_fs
                        : entanglement_time_from_bandwidth(spec.delta_omega,
                                                           spec.convention);
  return SourceConfig(omega0, spec.delta_omega, te, spec.photon_flux, spec.crystal);
}

MetaList base_meta(const ExperimentConfig& cfg, const PumpRun& run,
                   const NoiseSpec& noise) {
  MetaList meta;
  meta.emplace_back("config_hash", config_hash(cfg));
  meta.emplace_back("omega0_eV", format_double(run.pump.omega0));
  meta.emplace_back("T_e_fs", format_double(run.source.T_e));
  meta.emplace_back("delta_tau_fs", format_double(run.grid.delta_tau));
  meta.emplace_back("counts_budget", noise.counts_budget
                                         ? format_double(*noise.counts_budget)
                                         : "none");
  meta.emplace_back("seed", std::to_string(noise.seed));
  return meta;
}

struct ScanArtifacts {
  DelayTrace trace;
  Spectrum spectrum;
  PeakSet peaks;
  std::vector<double> expected_lines;
};

ScanArtifacts make_artifacts(const ExperimentConfig& cfg, const PumpRun& run,
                             const NoiseSpec& noise) {
  ScanArtifacts art;
  art.peaks = scan_peaks(run, cfg.scan, cfg.analysis, noise, &art.spectrum,
                         &art.trace);
  const auto d = detunings(run.system, run.pump, cfg.analysis.min_detuning);
  art.expected_lines = predicted_frequencies(d);
  return art;
}

void write_scan_artifacts(const ExperimentConfig& cfg, const PumpRun& run,
                          const ScanArtifacts& art, const NoiseSpec& noise,
                          const std::filesystem::path& dir) {
  MetaList meta = base_meta(cfg, run, noise);
  atomic_write_text(dir / "trace.csv", trace_csv(art.trace, meta));
  MetaList smeta = meta;
  smeta.emplace_back("omega_res_eV", format_double(art.spectrum.omega_res));
  smeta.emplace_back("omega_max_eV", format_double(art.spectrum.omega_max));
  smeta.emplace_back("dc_suppressed", art.spectrum.dc_suppressed ? "true" : "false");
  atomic_write_text(dir / "spectrum.csv", spectrum_csv(art.spectrum, smeta));
  std::ostringstream title;
  title << "eTPA spectrum, omega0 = " << format_double(run.pump.omega0) << " eV";
  atomic_write_text(dir / "spectrum.svg",
                    spectrum_svg(art.spectrum, art.expected_lines, &art.peaks,
                                 title.str(), smeta));
}

json energies_json(const ExtractionResult& result) {
  json arr = json::array();
  for (const auto& e : result.energies)
    arr.push_back({{"epsilon_eV", e.epsilon},
                   {"uncertainty_eV", e.uncertainty},
                   {"support", e.support}});
  return arr;
}

}  // namespace

std::vector<PumpRun> plan_runs(const ExperimentConfig& cfg,
                               bool override_resolution_check) {
  std::vector<PumpRun> runs;
  const auto omega0s = cfg.pumps.omega0_list();
  for (double omega0 : omega0s) {
    try {
      PumpConfig pump(omega0);
      LevelSystem system = resonant_system(cfg.system, omega0, cfg.analysis.resonance_tol);
      SourceConfig source = make_source(cfg.source, omega0);
      DelayGrid grid = make_grid(cfg.scan.delta_tau, source.T_e, cfg.scan.margin);
      // Early virtual-state check so bad configs fail at validation time.
      (void)detunings(system, pump, cfg.analysis.min_detuning);
      const double omega_res = frequency_resolution(grid);
      if (omega_res > cfg.source.delta_omega && !override_resolution_check)
        throw ConfigError(
            "config: frequency resolution " + format_double(omega_res) +
            " eV is coarser than the source bandwidth " +
            format_double(cfg.source.delta_omega) +
            " eV; use --override-resolution-check to proceed anyway");
      runs.push_back(PumpRun{pump, std::move(system), source, grid});
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config: pump omega0 = " + format_double(omega0) +
                        " eV: " + e.what());
    }
  }
  return runs;
}

PeakSet scan_peaks(const PumpRun& run, const ScanSpec& scan,
                   const AnalysisSpec& analysis, const NoiseSpec& noise,
                   Spectrum* out_spectrum, DelayTrace* out_trace) {
  const DelayTrace trace = simulate_trace(run.system, run.source, run.grid, noise);
  SpectrumOptions opts;
  opts.subtract_mean = scan.subtract_mean;
  opts.window = scan.window;
  const Spectrum sp = spectrum(trace, opts);
  PeakSet peaks =
      detect_peaks(sp, analysis.min_prominence,
                   analysis.dc_exclusion_bins * sp.omega_res, run.pump.omega0);
  if (out_spectrum) *out_spectrum = sp;
  if (out_trace) *out_trace = trace;
  return peaks;
}

void run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                  bool override_resolution_check) {
  const auto runs = plan_runs(cfg, override_resolution_check);
  for (std::size_t k = 0; k < runs.size(); ++k) {
    NoiseSpec noise{cfg.noise.counts_budget, mix_seed(cfg.noise.seed, k)};
    const auto art = make_artifacts(cfg, runs[k], noise);
    write_scan_artifacts(cfg, runs[k], art, noise,
                         out_dir / ("pump_" + std::to_string(k)));
    log_info("pump " + std::to_string(k) + ": " +
             std::to_string(art.peaks.peaks.size()) + " peaks detected");
  }
}

ExtractionResult run_extract(const ExperimentConfig& cfg,
                             const std::filesystem::path& out_dir,
                             bool override_resolution_check) {
  const auto runs = plan_runs(cfg, override_resolution_check);
  if (runs.size() < 2)
    throw ConfigError(
        "config: extract requires measurements at two or more pump wavelengths");
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(runs[i].pump.omega0 - runs[j].pump.omega0) < 1e-12)
        throw ConfigError(
            "config: pump settings must be pairwise distinct for extraction");

  std::vector<PeakSet> scans;
  double max_bin = 0.0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    NoiseSpec noise{cfg.noise.counts_budget, mix_seed(cfg.noise.seed, k)};
    const auto art = make_artifacts(cfg, runs[k], noise);
    write_scan_artifacts(cfg, runs[k], art, noise,
                         out_dir / ("pump_" + std::to_string(k)));
    max_bin = std::max(max_bin, art.spectrum.omega_res);
    scans.push_back(art.peaks);
  }

  const double tol = cfg.analysis.match_tol_bins * max_bin;
  ExtractionResult result = extract_energies(scans, tol);

  json report;
  report["schema_version"] = 1;
  report["config_hash"] = config_hash(cfg);
  report["tolerance_eV"] = tol;
  json pump_list = json::array();
  for (std::size_t k = 0; k < runs.size(); ++k)
    pump_list.push_back(
        {{"omega0_eV", runs[k].pump.omega0},
         {"T_e_fs", runs[k].source.T_e},
         {"n_peaks", scans[k].peaks.size()},
         {"n_peaks_outside_bandwidth",
          peaks_outside_bandwidth(scans[k], cfg.source.delta_omega).size()}});
  report["pumps"] = pump_list;
  report["energies"] = energies_json(result);
  json pairs = json::array();
  for (const auto& p : result.report.pairs)
    pairs.push_back({{"freq_a_eV", p.freq_a},
                     {"freq_b_eV", p.freq_b},
                     {"delta_eV", p.delta},
                     {"epsilon_eV", p.epsilon},
                     {"residual_eV", p.residual}});
  report["pairs"] = pairs;
  json trajectories = json::array();
  for (const auto& t : result.trajectories) {
    json tj = {{"slope", t.slope},
               {"family", family_name(t.family)},
               {"support", t.support},
               {"rms_residual_eV", t.rms_residual}};
    tj["epsilon_eV"] = t.epsilon ? json(*t.epsilon) : json(nullptr);
    trajectories.push_back(tj);
  }
  report["trajectories"] = trajectories;
  json labels = json::array();
  for (std::size_t s = 0; s < result.report.family_labels.size(); ++s) {
    json scan_labels = json::array();
    for (std::size_t i = 0; i < result.report.family_labels[s].size(); ++i)
      scan_labels.push_back(
          {{"frequency_eV", scans[s].peaks[i].frequency},
           {"family", family_name(result.report.family_labels[s][i])}});
    labels.push_back(scan_labels);
  }
  report["family_labels"] = labels;
  json unmatched = json::array();
  for (const auto& [s, i] : result.report.unmatched)
    unmatched.push_back({{"scan", s}, {"frequency_eV", scans[s].peaks[i].frequency}});
  report["unmatched"] = unmatched;
  atomic_write_text(out_dir / "match_report.json", report.dump(2) + "\n");

  std::ostringstream summary;
  summary << "recovered intermediate-state energies (tolerance "
          << format_double(tol) << " eV)\n";
  summary << "  #      epsilon_eV   uncertainty_eV   support\n";
  for (std::size_t i = 0; i < result.energies.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-5zu  %-11.6f  %-15.6f  %d\n", i + 1,
                  result.energies[i].epsilon, result.energies[i].uncertainty,
                  result.energies[i].support);
    summary << line;
  }
  if (result.energies.empty())
    summary << "  (none; see match_report.json for peak diagnostics)\n";
  atomic_write_text(out_dir / "summary.txt", summary.str());
  return result;
}

std::vector<double> draw_intermediates(std::mt19937_64& rng, int n, double e_min,
                                       double e_max,
                                       const std::vector<double>& pump_omega0,
                                       double min_line_freq, double min_separation,
                                       double min_detuning, int max_tries) {
  std::uniform_real_distribution<double> uniform(e_min, e_max);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<double> energies(static_cast<std::size_t>(n));
    for (auto& e : energies) e = uniform(rng);
    std::sort(energies.begin(), energies.end());

    bool ok = true;
    for (double omega0 : pump_omega0) {
      std::vector<double> deltas;
      deltas.reserve(energies.size());
      for (double e : energies) deltas.push_back(e - omega0);
      for (std::size_t j = 0; j < deltas.size() && ok; ++j) {
        if (std::abs(deltas[j]) < min_detuning) ok = false;
        // detuning sign must not flip between pump settings
        if ((energies[j] - pump_omega0.front()) * deltas[j] < 0.0) ok = false;
      }
      if (!ok) break;
      auto lines = predicted_frequencies(deltas);
      std::vector<double> positive;
      for (double f : lines)
        if (f > 1e-12) positive.push_back(f);
      for (std::size_t i = 0; i < positive.size() && ok; ++i) {
        if (positive[i] < min_line_freq) ok = false;
        if (i > 0 && positive[i] - positive[i - 1] < min_separation &&
            positive[i] - positive[i - 1] > 1e-12)
          ok = false;
        // exact collisions are allowed (they act as one line)
      }
      if (!ok) break;
    }
    if (ok) return energies;
  }
  throw std::runtime_error(
      "draw_intermediates: could not draw a well-separated system; relax the "
      "separation constraints or widen the energy range");
}

void run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
               bool override_resolution_check) {
  if (!cfg.sweep)
    throw ConfigError("config: sweep section required for the sweep command");
  const SweepSpec& sw = *cfg.sweep;
  const auto base_pumps = cfg.pumps.omega0_list();
  for (std::size_t i = 0; i < base_pumps.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(base_pumps[i] - base_pumps[j]) < 1e-12)
        throw ConfigError("config: pump settings must be pairwise distinct");

  const std::vector<double> axis_dw =
      sw.delta_omega_eV.empty() ? std::vector<double>{cfg.source.delta_omega}
                                : sw.delta_omega_eV;
  const std::vector<double> axis_dt =
      sw.delta_tau_fs.empty() ? std::vector<double>{cfg.scan.delta_tau}
                              : sw.delta_tau_fs;
  const std::vector<std::optional<double>> axis_budget =
      sw.counts_budget.empty()
          ? std::vector<std::optional<double>>{cfg.noise.counts_budget}
          : sw.counts_budget;
  const std::vector<int> axis_n =
      sw.n_intermediates.empty() ? std::vector<int>{0} : sw.n_intermediates;
  const std::vector<int> axis_pumps =
      sw.n_pumps.empty() ? std::vector<int>{static_cast<int>(base_pumps.size())}
                         : sw.n_pumps;

  const std::size_t n_cells = axis_dw.size() * axis_dt.size() *
                              axis_budget.size() * axis_n.size() *
                              axis_pumps.size();
  if (n_cells > sw.cell_cap)
    throw ConfigError("config: sweep has " + std::to_string(n_cells) +
                      " cells, above the cap of " + std::to_string(sw.cell_cap));
  for (int np : axis_pumps)
    if (np < 2 || np > static_cast<int>(base_pumps.size()))
      throw ConfigError(
          "config: sweep.n_pumps entries must be between 2 and the number of "
          "configured pump settings");
  for (int n : axis_n)
    if (n < 0) throw ConfigError("config: sweep.n_intermediates must be >= 0");

  std::ostringstream csv;
  csv << "# config_hash=" << config_hash(cfg) << "\n";
  csv << "delta_omega_eV,delta_tau_fs,counts_budget,n_intermediates,n_pumps,"
         "systems,recovery_rate,mean_abs_error_eV,runtime_s\n";

  std::size_t cell_index = 0;
  for (double dw : axis_dw)
    for (double dt : axis_dt)
      for (const auto& budget : axis_budget)
        for (int n_inter : axis_n)
          for (int n_pumps : axis_pumps) {
            const auto t0 = std::chrono::steady_clock::now();
            const std::vector<double> pumps(base_pumps.begin(),
                                            base_pumps.begin() + n_pumps);
            const double te = entanglement_time_from_bandwidth(dw, cfg.source.convention);
            const DelayGrid grid = make_grid(dt, te, cfg.scan.margin);
            const double bin =
                2.0 * kPi * kHbarEvFs / (static_cast<double>(grid.size()) * dt);
            const double omega_res = frequency_resolution(grid);
            if (omega_res > dw && !override_resolution_check)
              throw ConfigError(
                  "config: sweep cell delta_omega=" + format_double(dw) +
                  " eV, delta_tau=" + format_double(dt) +
                  " fs fails the resolution check; use "
                  "--override-resolution-check to proceed");
            const double tol = cfg.analysis.match_tol_bins * bin;
            const double dc_excl = cfg.analysis.dc_exclusion_bins * bin;

            int successes = 0;
            double abs_error_sum = 0.0;
            std::size_t abs_error_count = 0;
            for (int trial = 0; trial < sw.systems_per_cell; ++trial) {
              const std::uint64_t trial_seed =
                  mix_seed(cfg.noise.seed, cell_index, static_cast<std::uint64_t>(trial));
              std::mt19937_64 rng(trial_seed);

              std::vector<double> energies;
              double epsilon_i = cfg.system.epsilon_i;
              std::vector<Intermediate> levels;
              if (n_inter == 0) {
                levels = cfg.system.intermediates;
                for (const auto& lvl : levels) energies.push_back(lvl.epsilon);
              } else {
                energies = draw_intermediates(
                    rng, n_inter, sw.energy_min, sw.energy_max, pumps,
                    dc_excl + bin, sw.min_separation_bins * bin,
                    cfg.analysis.min_detuning);
                epsilon_i = 0.0;
                for (double e : energies) levels.push_back({e, 1.0, 1.0});
              }

              std::vector<PeakSet> scans;
              bool failed = false;
              for (std::size_t p = 0; p < pumps.size(); ++p) {
                try {
                  LevelSystem sys(epsilon_i, levels, epsilon_i + 2.0 * pumps[p]);
                  SourceConfig source(pumps[p], dw, te, cfg.source.photon_flux);
                  PumpRun run{PumpConfig(pumps[p]), std::move(sys), source, grid};
                  NoiseSpec noise{budget, mix_seed(trial_seed, p)};
                  scans.push_back(
                      scan_peaks(run, cfg.scan, cfg.analysis, noise));
                } catch (const std::exception&) {
                  failed = true;
                  break;
                }
              }
              if (failed) continue;

              const auto extraction = extract_energies(scans, tol);
              bool all_found = true;
              for (double truth : energies) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& est : extraction.energies)
                  best = std::min(best, std::abs(est.epsilon - truth));
                if (best <= tol) {
                  abs_error_sum += best;
                  ++abs_error_count;
                } else {
                  all_found = false;
                }
              }
              if (all_found) ++successes;
            }

            const auto t1 = std::chrono::steady_clock::now();
            const double runtime =
                std::chrono::duration<double>(t1 - t0).count();
            csv << format_double(dw) << "," << format_double(dt) << ","
                << (budget ? format_double(*budget) : "none") << "," << n_inter
                << "," << n_pumps << "," << sw.systems_per_cell << ","
                << format_double(static_cast<double>(successes) /
                                 static_cast<double>(sw.systems_per_cell))
                << ","
                << (abs_error_count
                        ? format_double(abs_error_sum /
                                        static_cast<double>(abs_error_count))
                        : "nan")
                << "," << format_double(runtime) << "\n";
            ++cell_index;
          }

  atomic_write_text(out_dir / "sweep.csv", csv.str());
}

}  // namespace etpa
