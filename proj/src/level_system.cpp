#include "etpa/level_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace etpa {

LevelSystem::LevelSystem(double epsilon_i, std::vector<Intermediate> intermediates,
                         double epsilon_f)
    : epsilon_i_(epsilon_i),
      intermediates_(std::move(intermediates)),
      epsilon_f_(epsilon_f) {
  if (intermediates_.empty())
    throw std::invalid_argument("LevelSystem: at least one intermediate state required");
  for (std::size_t j = 1; j < intermediates_.size(); ++j) {
    if (!(intermediates_[j].epsilon > intermediates_[j - 1].epsilon))
      throw std::invalid_argument(
          "LevelSystem: intermediate energies must be strictly ascending");
  }
  if (!(epsilon_f_ > epsilon_i_))
    throw std::invalid_argument("LevelSystem: epsilon_f must exceed epsilon_i");
}

double center_frequency(double lambda_p_nm) {
  if (!(lambda_p_nm > 0.0))
    throw std::domain_error("center_frequency: wavelength must be positive");
  return kPi * kHbarEvFs * kSpeedOfLightNmFs / lambda_p_nm;
}

PumpConfig::PumpConfig(double omega0_eV) : omega0(omega0_eV) {
  if (!(omega0 > 0.0))
    throw std::invalid_argument("PumpConfig: omega0 must be positive");
}

PumpConfig PumpConfig::from_wavelength(double lambda_p_nm) {
  return PumpConfig(center_frequency(lambda_p_nm));
}

bool PumpConfig::resonant_with(const LevelSystem& sys, double tol) const {
  return std::abs(sys.epsilon_f() - sys.epsilon_i() - omega_p()) < tol;
}

DetuningSet detunings(const LevelSystem& sys, const PumpConfig& pump,
                      double min_detuning) {
  if (!pump.resonant_with(sys))
    throw std::invalid_argument(
        "detunings: two-photon resonance epsilon_f - epsilon_i = 2*omega0 violated");
  return detunings_off_resonance(sys, pump.omega0, min_detuning);
}

DetuningSet detunings_off_resonance(const LevelSystem& sys, double omega0_eV,
                                    double min_detuning) {
  DetuningSet out;
  out.deltas.reserve(sys.size());
  out.amplitudes.reserve(sys.size());
  for (const auto& level : sys.intermediates()) {
    const double delta = level.epsilon - sys.epsilon_i() - omega0_eV;
    if (std::abs(delta) < min_detuning)
      throw VirtualStateError(
          "detunings: intermediate at " + std::to_string(level.epsilon) +
          " eV within " + std::to_string(min_detuning) +
          " eV of the photon center frequency (virtual-state violation)");
    out.deltas.push_back(delta);
    out.amplitudes.push_back(level.mu_fj * level.mu_ji / delta);
  }
  return out;
}

std::vector<double> predicted_frequencies(const std::vector<double>& deltas) {
  if (deltas.empty())
    throw std::invalid_argument("predicted_frequencies: empty detuning set");
  const std::size_t n = deltas.size();
  std::vector<double> out;
  out.reserve(1 + 2 * n * (n + 1));
  out.push_back(0.0);
  for (double d : deltas) {
    out.push_back(d);
    out.push_back(-d);
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (j != k) out.push_back(deltas[j] - deltas[k]);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      out.push_back(deltas[j] + deltas[k]);
      out.push_back(-(deltas[j] + deltas[k]));
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> predicted_frequencies(const DetuningSet& d) {
  return predicted_frequencies(d.deltas);
}

std::size_t count_distinct_nonzero(const std::vector<double>& sorted_freqs,
                                   double eps) {
  std::size_t count = 0;
  double last = 0.0;
  bool have_last = false;
  for (double f : sorted_freqs) {
    if (std::abs(f) <= eps) continue;
    if (!have_last || f - last > eps) ++count;
    last = f;
    have_last = true;
  }
  return count;
}

CrystalTiming entanglement_time_from_crystal(double crystal_length,
                                             double inv_group_velocity_s,
                                             double inv_group_velocity_i) {
  if (!(crystal_length > 0.0))
    throw std::domain_error("entanglement_time_from_crystal: length must be positive");
  const double te = crystal_length * (inv_group_velocity_s - inv_group_velocity_i) / 2.0;
  int sign = 0;
  if (te > 0.0) sign = 1;
  if (te < 0.0) sign = -1;
  return {std::abs(te), sign};
}

double entanglement_time_from_bandwidth(double delta_omega_eV,
                                        BandwidthConvention convention) {
  if (!(delta_omega_eV > 0.0))
    throw std::domain_error(
        "entanglement_time_from_bandwidth: bandwidth must be positive");
  switch (convention) {
    case BandwidthConvention::PlanckH:
      return 2.0 * kPi * kPi * kHbarEvFs / delta_omega_eV;
    case BandwidthConvention::ReducedHbar:
      return kPi * kHbarEvFs / delta_omega_eV;
  }
  throw std::logic_error("entanglement_time_from_bandwidth: bad convention");
}

}  // namespace etpa
