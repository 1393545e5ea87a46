#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "etpa/constants.hpp"

namespace etpa {

// Thrown when an intermediate state sits too close to the photon center
// frequency for the perturbative (virtual-state) picture to hold.
class VirtualStateError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Intermediate {
  double epsilon = 0.0;  // eV
  double mu_fj = 1.0;    // transition dipole moment |f> <- |j>, arbitrary units
  double mu_ji = 1.0;    // transition dipole moment |j> <- |i>, arbitrary units
};

// Sample model: initial state |i>, N non-degenerate intermediate states |j>
// and a final state |f> selected by the two-photon resonance.
class LevelSystem {
 public:
  LevelSystem(double epsilon_i, std::vector<Intermediate> intermediates,
              double epsilon_f);

  double epsilon_i() const { return epsilon_i_; }
  double epsilon_f() const { return epsilon_f_; }
  const std::vector<Intermediate>& intermediates() const { return intermediates_; }
  std::size_t size() const { return intermediates_.size(); }

 private:
  double epsilon_i_;
  std::vector<Intermediate> intermediates_;
  double epsilon_f_;
};

inline constexpr double kDefaultResonanceTol = 1e-6;  // eV
inline constexpr double kDefaultMinDetuning = 0.010;  // eV

// Center angular frequency of the degenerate photon pair, in eV.
double center_frequency(double lambda_p_nm);

struct PumpConfig {
  explicit PumpConfig(double omega0_eV);
  static PumpConfig from_wavelength(double lambda_p_nm);

  double omega0;  // eV
  double omega_p() const { return 2.0 * omega0; }

  bool resonant_with(const LevelSystem& sys,
                     double tol = kDefaultResonanceTol) const;
};

// Detunings Delta_j of the intermediate states from the photon center
// frequency, together with the transition amplitudes A_j = mu_fj*mu_ji/Delta_j.
struct DetuningSet {
  std::vector<double> deltas;      // eV
  std::vector<double> amplitudes;  // arbitrary units
  std::size_t size() const { return deltas.size(); }
};

DetuningSet detunings(const LevelSystem& sys, const PumpConfig& pump,
                      double min_detuning = kDefaultMinDetuning);

// Same computation without the two-photon resonance gate; for callers that
// model off-resonant drive explicitly through the finite-time kernel.
DetuningSet detunings_off_resonance(const LevelSystem& sys, double omega0_eV,
                                    double min_detuning = kDefaultMinDetuning);

// Full multiset of expected spectral line positions:
//   {0} u {+-Delta_j} u {Delta_j - Delta_k, j != k} u {+-(Delta_j + Delta_k), j <= k}
// Sorted ascending; collisions between families are kept with multiplicity.
// For collision-free detunings the distinct nonzero count is 2(N+1)N.
std::vector<double> predicted_frequencies(const std::vector<double>& deltas);
std::vector<double> predicted_frequencies(const DetuningSet& d);

std::size_t count_distinct_nonzero(const std::vector<double>& sorted_freqs,
                                   double eps = 1e-9);

// T_e = l (N_s - N_i) / 2; sign is reported separately, the magnitude is what
// enters the signal model. sign == 0 flags a degenerate source.
struct CrystalTiming {
  double te_fs;
  int sign;
};
CrystalTiming entanglement_time_from_crystal(double crystal_length,
                                             double inv_group_velocity_s,
                                             double inv_group_velocity_i);

// The bandwidth-to-entanglement-time relation T_e = pi / Delta_omega is unit
// sensitive: interpreting the eV bandwidth through h (ordinary-frequency
// spacing) gives T_e = 2 pi^2 hbar / dE, through hbar (angular) pi hbar / dE.
// PlanckH is the default; both are kept available on purpose.
enum class BandwidthConvention { PlanckH, ReducedHbar };
double entanglement_time_from_bandwidth(
    double delta_omega_eV,
    BandwidthConvention convention = BandwidthConvention::PlanckH);

}  // namespace etpa
