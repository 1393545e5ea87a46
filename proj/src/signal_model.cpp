#include "etpa/signal_model.hpp"

#include <cmath>
#include <stdexcept>

namespace etpa {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

SourceConfig::SourceConfig(double omega0_eV, double delta_omega_eV, double te_fs,
                           double flux, std::optional<CrystalParams> crystal_params)
    : omega0(omega0_eV),
      delta_omega(delta_omega_eV),
      T_e(te_fs),
      photon_flux(flux),
      crystal(std::move(crystal_params)) {
  if (!(omega0 > 0.0))
    throw std::invalid_argument("SourceConfig: omega0 must be positive");
  if (!(delta_omega > 0.0))
    throw std::invalid_argument("SourceConfig: delta_omega must be positive");
  if (!(T_e > 0.0))
    throw std::invalid_argument("SourceConfig: T_e must be positive");
  if (crystal) {
    const auto timing = entanglement_time_from_crystal(
        crystal->length, crystal->inv_group_velocity_s,
        crystal->inv_group_velocity_i);
    if (std::abs(timing.te_fs - T_e) > 1e-9 * T_e)
      throw std::invalid_argument(
          "SourceConfig: crystal parameters inconsistent with T_e");
  }
}

SourceConfig SourceConfig::from_bandwidth(double omega0_eV, double delta_omega_eV,
                                          BandwidthConvention convention,
                                          double flux) {
  return SourceConfig(omega0_eV, delta_omega_eV,
                      entanglement_time_from_bandwidth(delta_omega_eV, convention),
                      flux);
}

std::complex<double> joint_spectral_amplitude(const SourceConfig& src,
                                              double omega_s_eV,
                                              double omega_i_eV,
                                              double shell_tol) {
  if (std::abs(omega_s_eV + omega_i_eV - src.omega_p()) > shell_tol)
    throw std::invalid_argument(
        "joint_spectral_amplitude: frequencies off the omega_s + omega_i = omega_p shell");
  const double norm = std::sqrt(src.T_e / std::sqrt(kPi));
  const double arg = phase_rad(omega_s_eV - omega_i_eV, src.T_e) / 2.0;
  const double phase = phase_rad(omega_s_eV, src.tau);
  return norm * sinc(arg) * std::polar(1.0, phase);
}

double cross_section(const DetuningSet& d, double te_fs, double tau_fs) {
  std::complex<double> sum = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double plus = phase_rad(d.deltas[j], te_fs + tau_fs);
    const double minus = phase_rad(d.deltas[j], te_fs - tau_fs);
    sum += d.amplitudes[j] *
           (2.0 - std::polar(1.0, -plus) - std::polar(1.0, -minus));
  }
  return std::norm(sum);
}

double cross_section_expanded(const DetuningSet& d, double te_fs, double tau_fs) {
  // Sum over pathway pairs of
  //   A_j A_k [ 4 - 2 e^{+i p_k} (e^{i q_k} + cc) - 2 e^{-i p_j} (e^{i q_j} + cc)
  //             + e^{-i (p_j - p_k)} (e^{i (q_j - q_k)} + cc + e^{i (q_j + q_k)} + cc) ]
  // with p = Delta T_e and q = Delta tau in radians. The imaginary parts cancel
  // pairwise between (j, k) and (k, j).
  std::complex<double> total = 0.0;
  const std::complex<double> i1(0.0, 1.0);
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double pj = phase_rad(d.deltas[j], te_fs);
    const double qj = phase_rad(d.deltas[j], tau_fs);
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double pk = phase_rad(d.deltas[k], te_fs);
      const double qk = phase_rad(d.deltas[k], tau_fs);
      const double cos_qj = 2.0 * std::cos(qj);
      const double cos_qk = 2.0 * std::cos(qk);
      std::complex<double> term = 4.0;
      term -= 2.0 * std::exp(i1 * pk) * cos_qk;
      term -= 2.0 * std::exp(-i1 * pj) * cos_qj;
      term += std::exp(-i1 * (pj - pk)) *
              (2.0 * std::cos(qj - qk) + 2.0 * std::cos(qj + qk));
      total += d.amplitudes[j] * d.amplitudes[k] * term;
    }
  }
  return total.real();
}

double sinc_delta(double x_eV, const InteractionWindow& w) {
  const double u = phase_rad(x_eV, w.t) / 2.0;
  if (std::abs(u) < 1e-6) {
    // sin^2(u)/u^2 -> 1 - u^2/3
    return w.t / (2.0 * kPi * kHbarEvFs) * (1.0 - u * u / 3.0);
  }
  const double s = std::sin(u);
  return 2.0 * kHbarEvFs * s * s / (kPi * w.t * x_eV * x_eV);
}

double transition_probability(const LevelSystem& sys, const SourceConfig& src,
                              const PhysicalConstants& consts,
                              const InteractionWindow& w, double tau_fs) {
  const double mismatch = sys.epsilon_f() - sys.epsilon_i() - src.omega_p();
  const double prefactor =
      src.omega_p() * src.omega_p() /
      (4.0 * consts.hbar * consts.hbar * std::sqrt(kPi) * consts.eps0 *
       consts.eps0 * consts.beam_area * consts.beam_area * src.T_e);
  const auto d = detunings_off_resonance(sys, src.omega0);
  return prefactor * 2.0 * kPi * w.t * sinc_delta(mismatch, w) *
         cross_section(d, src.T_e, tau_fs);
}

AbsorptionRate absorption_rate(double photon_flux, double sigma_e, double delta_r) {
  if (photon_flux < 0.0 || sigma_e < 0.0 || delta_r < 0.0)
    throw std::invalid_argument("absorption_rate: inputs must be nonnegative");
  AbsorptionRate r;
  r.quantum = sigma_e * photon_flux;
  r.classical = delta_r * photon_flux * photon_flux;
  r.total = r.quantum + r.classical;
  if (delta_r > 0.0) r.crossover_flux = sigma_e / delta_r;
  return r;
}

}  // namespace etpa
