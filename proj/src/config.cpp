#include "etpa/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "etpa/io.hpp"

namespace etpa {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      fail(where + "." + item.key(), "unknown field");
}

double get_number(const json& obj, const std::string& where,
                  const std::string& key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(where + "." + key, "required number missing");
  }
  if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

std::optional<double> get_optional_number(const json& obj, const std::string& where,
                                          const std::string& key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_number()) fail(where + "." + key, "expected a number or null");
  return obj[key].get<double>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail(where + "." + key, "expected a boolean");
  return obj[key].get<bool>();
}

std::vector<double> get_number_array(const json& arr, const std::string& where) {
  if (!arr.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) fail(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

SystemSpec parse_system(const json& j) {
  require_keys(j, "system", {"epsilon_i", "intermediates", "epsilon_f"});
  SystemSpec sys;
  sys.epsilon_i = get_number(j, "system", "epsilon_i", 0.0);
  sys.epsilon_f = get_optional_number(j, "system", "epsilon_f");
  if (!j.contains("intermediates") || !j["intermediates"].is_array())
    fail("system.intermediates", "required array missing");
  for (std::size_t i = 0; i < j["intermediates"].size(); ++i) {
    const auto& lvl = j["intermediates"][i];
    const std::string where = "system.intermediates[" + std::to_string(i) + "]";
    require_keys(lvl, where, {"epsilon", "mu_fj", "mu_ji"});
    Intermediate level;
    level.epsilon = get_number(lvl, where, "epsilon");
    level.mu_fj = get_number(lvl, where, "mu_fj", 1.0);
    level.mu_ji = get_number(lvl, where, "mu_ji", 1.0);
    sys.intermediates.push_back(level);
  }
  if (sys.intermediates.empty())
    fail("system.intermediates", "at least one intermediate state required");
  for (std::size_t i = 1; i < sys.intermediates.size(); ++i)
    if (!(sys.intermediates[i].epsilon > sys.intermediates[i - 1].epsilon))
      fail("system.intermediates", "energies must be strictly ascending");
  return sys;
}

PumpSpec parse_pumps(const json& j) {
  require_keys(j, "pumps", {"wavelengths_nm", "omega0_eV"});
  PumpSpec pumps;
  const bool has_nm = j.contains("wavelengths_nm") && !j["wavelengths_nm"].is_null();
  const bool has_ev = j.contains("omega0_eV") && !j["omega0_eV"].is_null();
  if (has_nm == has_ev)
    fail("pumps", "exactly one of wavelengths_nm / omega0_eV must be given");
  if (has_nm) {
    pumps.wavelengths_nm = get_number_array(j["wavelengths_nm"], "pumps.wavelengths_nm");
    for (double nm : pumps.wavelengths_nm)
      if (!(nm > 0.0)) fail("pumps.wavelengths_nm", "wavelengths must be positive");
  } else {
    pumps.omega0_eV = get_number_array(j["omega0_eV"], "pumps.omega0_eV");
    for (double ev : pumps.omega0_eV)
      if (!(ev > 0.0)) fail("pumps.omega0_eV", "frequencies must be positive");
  }
  if (pumps.omega0_list().empty()) fail("pumps", "at least one pump setting required");
  return pumps;
}

SourceSpec parse_source(const json& j) {
  require_keys(j, "source",
               {"delta_omega_eV", "te_convention", "T_e_fs", "crystal", "photon_flux"});
  SourceSpec src;
  src.delta_omega = get_number(j, "source", "delta_omega_eV", 0.0074);
  if (!(src.delta_omega > 0.0)) fail("source.delta_omega_eV", "must be positive");
  if (j.contains("te_convention")) {
    const auto& conv = j["te_convention"];
    if (!conv.is_string()) fail("source.te_convention", "expected a string");
    const std::string s = conv.get<std::string>();
    if (s == "planck-h")
      src.convention = BandwidthConvention::PlanckH;
    else if (s == "reduced-hbar")
      src.convention = BandwidthConvention::ReducedHbar;
    else
      fail("source.te_convention", "expected \"planck-h\" or \"reduced-hbar\"");
  }
  src.te_override_fs = get_optional_number(j, "source", "T_e_fs");
  if (src.te_override_fs && !(*src.te_override_fs > 0.0))
    fail("source.T_e_fs", "must be positive");
  src.photon_flux = get_number(j, "source", "photon_flux", 0.0);
  if (j.contains("crystal") && !j["crystal"].is_null()) {
    const auto& c = j["crystal"];
    require_keys(c, "source.crystal", {"length", "N_s", "N_i"});
    src.crystal = CrystalParams{get_number(c, "source.crystal", "length"),
                                get_number(c, "source.crystal", "N_s"),
                                get_number(c, "source.crystal", "N_i")};
  }
  return src;
}

ScanSpec parse_scan(const json& j) {
  require_keys(j, "scan", {"delta_tau_fs", "margin", "subtract_mean", "window"});
  ScanSpec scan;
  scan.delta_tau = get_number(j, "scan", "delta_tau_fs", 0.3);
  scan.margin = get_number(j, "scan", "margin", 0.99);
  scan.subtract_mean = get_bool(j, "scan", "subtract_mean", true);
  if (j.contains("window")) {
    if (!j["window"].is_string()) fail("scan.window", "expected a string");
    const std::string w = j["window"].get<std::string>();
    if (w == "none")
      scan.window = SpectrumOptions::Window::None;
    else if (w == "hann")
      scan.window = SpectrumOptions::Window::Hann;
    else
      fail("scan.window", "expected \"none\" or \"hann\"");
  }
  return scan;
}

NoiseConfig parse_noise(const json& j) {
  require_keys(j, "noise", {"counts_budget", "seed"});
  NoiseConfig noise;
  noise.counts_budget = get_optional_number(j, "noise", "counts_budget");
  if (noise.counts_budget && !(*noise.counts_budget > 0.0))
    fail("noise.counts_budget", "must be positive when given");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("noise.seed", "expected an unsigned integer");
    noise.seed = j["seed"].get<std::uint64_t>();
  }
  return noise;
}

AnalysisSpec parse_analysis(const json& j) {
  require_keys(j, "analysis",
               {"min_prominence", "dc_exclusion_bins", "match_tol_bins",
                "slope_tolerance", "guess_cap", "min_detuning_eV", "resonance_tol_eV"});
  AnalysisSpec a;
  a.min_prominence = get_number(j, "analysis", "min_prominence", 0.01);
  a.dc_exclusion_bins = get_number(j, "analysis", "dc_exclusion_bins", 3.0);
  a.match_tol_bins = get_number(j, "analysis", "match_tol_bins", 2.0);
  a.slope_tolerance = get_number(j, "analysis", "slope_tolerance", 0.25);
  a.min_detuning = get_number(j, "analysis", "min_detuning_eV", kDefaultMinDetuning);
  a.resonance_tol = get_number(j, "analysis", "resonance_tol_eV", kDefaultResonanceTol);
  if (j.contains("guess_cap")) {
    if (!j["guess_cap"].is_number_unsigned())
      fail("analysis.guess_cap", "expected an unsigned integer");
    a.guess_cap = j["guess_cap"].get<std::size_t>();
  }
  if (!(a.min_prominence >= 0.0)) fail("analysis.min_prominence", "must be nonnegative");
  if (!(a.match_tol_bins > 0.0)) fail("analysis.match_tol_bins", "must be positive");
  return a;
}

SweepSpec parse_sweep(const json& j) {
  require_keys(j, "sweep",
               {"delta_omega_eV", "delta_tau_fs", "counts_budget", "n_intermediates",
                "n_pumps", "systems_per_cell", "energy_min_eV", "energy_max_eV",
                "min_separation_bins", "cell_cap"});
  SweepSpec s;
  if (j.contains("delta_omega_eV"))
    s.delta_omega_eV = get_number_array(j["delta_omega_eV"], "sweep.delta_omega_eV");
  if (j.contains("delta_tau_fs"))
    s.delta_tau_fs = get_number_array(j["delta_tau_fs"], "sweep.delta_tau_fs");
  if (j.contains("counts_budget")) {
    if (!j["counts_budget"].is_array())
      fail("sweep.counts_budget", "expected an array of numbers or nulls");
    for (const auto& v : j["counts_budget"]) {
      if (v.is_null())
        s.counts_budget.push_back(std::nullopt);
      else if (v.is_number())
        s.counts_budget.push_back(v.get<double>());
      else
        fail("sweep.counts_budget", "expected an array of numbers or nulls");
    }
  }
  const auto int_array = [&](const char* key) {
    std::vector<int> out;
    for (double v : get_number_array(j[key], std::string("sweep.") + key))
      out.push_back(static_cast<int>(v));
    return out;
  };
  if (j.contains("n_intermediates")) s.n_intermediates = int_array("n_intermediates");
  if (j.contains("n_pumps")) s.n_pumps = int_array("n_pumps");
  s.systems_per_cell =
      static_cast<int>(get_number(j, "sweep", "systems_per_cell", 20.0));
  if (s.systems_per_cell < 1) fail("sweep.systems_per_cell", "must be at least 1");
  s.energy_min = get_number(j, "sweep", "energy_min_eV", 0.4);
  s.energy_max = get_number(j, "sweep", "energy_max_eV", 2.4);
  if (!(s.energy_max > s.energy_min))
    fail("sweep.energy_max_eV", "must exceed energy_min_eV");
  s.min_separation_bins = get_number(j, "sweep", "min_separation_bins", 3.0);
  if (j.contains("cell_cap")) {
    if (!j["cell_cap"].is_number_unsigned())
      fail("sweep.cell_cap", "expected an unsigned integer");
    s.cell_cap = j["cell_cap"].get<std::size_t>();
  }
  return s;
}

}  // namespace

std::vector<double> PumpSpec::omega0_list() const {
  if (!omega0_eV.empty()) return omega0_eV;
  std::vector<double> out;
  out.reserve(wavelengths_nm.size());
  for (double nm : wavelengths_nm) out.push_back(center_frequency(nm));
  return out;
}

ExperimentConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  require_keys(j, "(root)",
               {"schema_version", "system", "pumps", "source", "scan", "noise",
                "analysis", "sweep"});
  ExperimentConfig cfg;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    fail("schema_version", "required integer missing");
  cfg.schema_version = j["schema_version"].get<int>();
  if (cfg.schema_version != 1)
    fail("schema_version", "unsupported version " + std::to_string(cfg.schema_version));
  if (!j.contains("system")) fail("system", "required section missing");
  cfg.system = parse_system(j["system"]);
  if (!j.contains("pumps")) fail("pumps", "required section missing");
  cfg.pumps = parse_pumps(j["pumps"]);
  cfg.source = j.contains("source") ? parse_source(j["source"]) : SourceSpec{};
  cfg.scan = j.contains("scan") ? parse_scan(j["scan"]) : ScanSpec{};
  cfg.noise = j.contains("noise") ? parse_noise(j["noise"]) : NoiseConfig{};
  cfg.analysis = j.contains("analysis") ? parse_analysis(j["analysis"]) : AnalysisSpec{};
  if (j.contains("sweep") && !j["sweep"].is_null()) cfg.sweep = parse_sweep(j["sweep"]);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg, int indent) {
  json j;
  j["schema_version"] = cfg.schema_version;

  json sys;
  sys["epsilon_i"] = cfg.system.epsilon_i;
  sys["epsilon_f"] = cfg.system.epsilon_f ? json(*cfg.system.epsilon_f) : json(nullptr);
  sys["intermediates"] = json::array();
  for (const auto& lvl : cfg.system.intermediates)
    sys["intermediates"].push_back(
        {{"epsilon", lvl.epsilon}, {"mu_fj", lvl.mu_fj}, {"mu_ji", lvl.mu_ji}});
  j["system"] = sys;

  json pumps;
  if (!cfg.pumps.wavelengths_nm.empty())
    pumps["wavelengths_nm"] = cfg.pumps.wavelengths_nm;
  else
    pumps["omega0_eV"] = cfg.pumps.omega0_eV;
  j["pumps"] = pumps;

  json src;
  src["delta_omega_eV"] = cfg.source.delta_omega;
  src["te_convention"] = cfg.source.convention == BandwidthConvention::PlanckH
                             ? "planck-h"
                             : "reduced-hbar";
  src["T_e_fs"] =
      cfg.source.te_override_fs ? json(*cfg.source.te_override_fs) : json(nullptr);
  src["photon_flux"] = cfg.source.photon_flux;
  if (cfg.source.crystal)
    src["crystal"] = {{"length", cfg.source.crystal->length},
                      {"N_s", cfg.source.crystal->inv_group_velocity_s},
                      {"N_i", cfg.source.crystal->inv_group_velocity_i}};
  else
    src["crystal"] = nullptr;
  j["source"] = src;

  j["scan"] = {{"delta_tau_fs", cfg.scan.delta_tau},
               {"margin", cfg.scan.margin},
               {"subtract_mean", cfg.scan.subtract_mean},
               {"window", cfg.scan.window == SpectrumOptions::Window::Hann ? "hann"
                                                                           : "none"}};
  j["noise"] = {{"counts_budget", cfg.noise.counts_budget
                                      ? json(*cfg.noise.counts_budget)
                                      : json(nullptr)},
                {"seed", cfg.noise.seed}};
  j["analysis"] = {{"min_prominence", cfg.analysis.min_prominence},
                   {"dc_exclusion_bins", cfg.analysis.dc_exclusion_bins},
                   {"match_tol_bins", cfg.analysis.match_tol_bins},
                   {"slope_tolerance", cfg.analysis.slope_tolerance},
                   {"guess_cap", cfg.analysis.guess_cap},
                   {"min_detuning_eV", cfg.analysis.min_detuning},
                   {"resonance_tol_eV", cfg.analysis.resonance_tol}};
  if (cfg.sweep) {
    json sw;
    sw["delta_omega_eV"] = cfg.sweep->delta_omega_eV;
    sw["delta_tau_fs"] = cfg.sweep->delta_tau_fs;
    sw["counts_budget"] = json::array();
    for (const auto& b : cfg.sweep->counts_budget)
      sw["counts_budget"].push_back(b ? json(*b) : json(nullptr));
    sw["n_intermediates"] = cfg.sweep->n_intermediates;
    sw["n_pumps"] = cfg.sweep->n_pumps;
    sw["systems_per_cell"] = cfg.sweep->systems_per_cell;
    sw["energy_min_eV"] = cfg.sweep->energy_min;
    sw["energy_max_eV"] = cfg.sweep->energy_max;
    sw["min_separation_bins"] = cfg.sweep->min_separation_bins;
    sw["cell_cap"] = cfg.sweep->cell_cap;
    j["sweep"] = sw;
  }
  return j.dump(indent);
}

std::string config_hash(const ExperimentConfig& cfg) {
  return to_hex(fnv1a64(config_to_json_text(cfg, -1)));
}

}  // namespace etpa
