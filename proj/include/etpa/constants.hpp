#pragma once

namespace etpa {

inline constexpr double kPi = 3.14159265358979323846;

// Unit convention: energies and angular frequencies in eV (hbar*omega reported
// in eV), times in fs, lengths in nm.
inline constexpr double kHbarEvFs = 0.6582119569;        // eV fs
inline constexpr double kSpeedOfLightNmFs = 299.792458;  // nm / fs

// The only conversion site between (eV x fs) products and radians.
inline double phase_rad(double energy_eV, double time_fs) {
  return energy_eV * time_fs / kHbarEvFs;
}

struct PhysicalConstants {
  double hbar = kHbarEvFs;            // eV fs
  double c = kSpeedOfLightNmFs;       // nm / fs
  double eps0 = 8.8541878128e-12;     // F/m; enters only the two-photon probability prefactor
  double beam_area = 1.0e-12;         // m^2; enters only the two-photon probability prefactor
};

}  // namespace etpa
