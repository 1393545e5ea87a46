#pragma once

#include <complex>
#include <optional>

#include "etpa/constants.hpp"
#include "etpa/level_system.hpp"

namespace etpa {

struct CrystalParams {
  double length;                // any length unit L
  double inv_group_velocity_s;  // fs / L
  double inv_group_velocity_i;  // fs / L
};

// Photon-pair source description. T_e either comes from the bandwidth (see
// from_bandwidth) or is set directly; if crystal parameters are present they
// must reproduce it.
struct SourceConfig {
  SourceConfig(double omega0_eV, double delta_omega_eV, double te_fs,
               double photon_flux = 0.0,
               std::optional<CrystalParams> crystal_params = std::nullopt);

  static SourceConfig from_bandwidth(
      double omega0_eV, double delta_omega_eV,
      BandwidthConvention convention = BandwidthConvention::PlanckH,
      double photon_flux = 0.0);

  double omega0;       // eV
  double delta_omega;  // eV
  double T_e;          // fs
  double tau = 0.0;    // fs; external delay used by joint_spectral_amplitude
  double photon_flux;  // photons per unit area and time
  std::optional<CrystalParams> crystal;

  double omega_p() const { return 2.0 * omega0; }
};

// Elapsed interaction time of the perturbative two-photon transition.
struct InteractionWindow {
  explicit InteractionWindow(double t_fs) : t(t_fs) {
    if (!(t > 0.0))
      throw std::invalid_argument("InteractionWindow: t must be positive");
  }
  double t;  // fs
};

// Twin-state amplitude density on the energy-conservation shell
// omega_s + omega_i = omega_p. The pump is monochromatic, so the shell is a
// hard constraint: callers pass frequencies already on it.
std::complex<double> joint_spectral_amplitude(const SourceConfig& src,
                                              double omega_s_eV,
                                              double omega_i_eV,
                                              double shell_tol = 1e-9);

// Two-photon absorption cross section s(T_e, tau) as the modulus squared of
// the summed pathway amplitudes.
double cross_section(const DetuningSet& d, double te_fs, double tau_fs);

// The same quantity written out as the explicit double sum over pathway pairs
// (j, k), diagonal included. Algebraically identical to cross_section; kept
// separate as an independent evaluation route.
double cross_section_expanded(const DetuningSet& d, double te_fs, double tau_fs);

// Finite-time energy-conservation kernel, a nascent delta of width 4 hbar /
// (pi t) in eV. Density in 1/eV; the x = 0 limit is t / (2 pi hbar).
double sinc_delta(double x_eV, const InteractionWindow& w);

// Full two-photon transition probability. Dipole moments are in arbitrary
// units, so the absolute scale is arbitrary as well; ratios and the t- and
// detuning-dependence are the meaningful content.
double transition_probability(const LevelSystem& sys, const SourceConfig& src,
                              const PhysicalConstants& consts,
                              const InteractionWindow& w, double tau_fs);

struct AbsorptionRate {
  double total;
  double quantum;    // sigma_e * flux
  double classical;  // delta_r * flux^2
  std::optional<double> crossover_flux;  // sigma_e / delta_r when delta_r > 0
};

// Entangled (linear in flux) versus classical (quadratic) absorption rate.
AbsorptionRate absorption_rate(double photon_flux, double sigma_e, double delta_r);

}  // namespace etpa
