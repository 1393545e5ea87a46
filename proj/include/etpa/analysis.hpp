#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "etpa/scan.hpp"

namespace etpa {

struct Peak {
  double frequency = 0.0;  // eV, sub-bin refined
  double magnitude = 0.0;
  double prominence = 0.0;
};

struct PeakSet {
  std::vector<Peak> peaks;  // sorted by frequency
  double omega0 = 0.0;      // eV, pump setting of the scan
  double omega_res = 0.0;   // eV
};

// Local maxima with topographic prominence above min_prominence times the
// spectrum maximum (DC exclusion zone left out of both the threshold
// reference and the result). Positions are refined by three-point parabolic
// interpolation.
PeakSet detect_peaks(const Spectrum& sp, double min_prominence,
                     double dc_exclusion_eV, double omega0_eV);

// Indices of peaks whose frequency magnitude exceeds the source bandwidth.
// Informational only: how strongly such lines attenuate in practice is an
// instrument question, so nothing here rejects them.
std::vector<std::size_t> peaks_outside_bandwidth(const PeakSet& p,
                                                 double delta_omega_eV);

// The three spectral line families, named by how a line moves when the pump
// center frequency omega0 is raised. Lines at +-Delta_j shift by -+omega0,
// lines at Delta_j - Delta_k stay put, lines at +-(Delta_j + Delta_k) shift
// by -+2 omega0. On the positive-frequency half both signed branches of a
// family occur; the label identifies the family, not the branch sign.
enum class Family { ShiftMinusOmega0, Invariant, ShiftMinusTwoOmega0, Unclassified };

std::string family_name(Family f);

struct MatchedPair {
  std::size_t index_a = 0;  // positions into the PeakSet::peaks arrays
  std::size_t index_b = 0;
  double freq_a = 0.0;      // eV
  double freq_b = 0.0;      // eV
  double delta = 0.0;       // inferred signed detuning, from scan a
  double epsilon = 0.0;     // inferred intermediate energy, eV
  double residual = 0.0;    // eV
};

struct MatchReport {
  std::vector<MatchedPair> pairs;
  // Per scan, per peak (parallel to PeakSet::peaks).
  std::vector<std::vector<Family>> family_labels;
  // (scan index, peak index) of positive-side peaks left unmatched.
  std::vector<std::pair<std::size_t, std::size_t>> unmatched;
};

// Pairs positive-side peaks of two scans separated by +-(omega0_a - omega0_b),
// i.e. the two signed branches of the +-Delta_j family, and infers
// epsilon_j = Delta_j + omega0. Greedy smallest-residual assignment, each
// peak used at most once; ties broken by larger summed prominence.
MatchReport pair_match(const PeakSet& a, const PeakSet& b, double tol_eV);

struct Trajectory {
  double slope = 0.0;          // fitted d f / d omega0
  double intercept = 0.0;      // eV
  double rms_residual = 0.0;   // eV
  int support = 0;             // number of scans linked
  Family family = Family::Unclassified;
  std::vector<int> peak_index;           // per scan; -1 where unlinked
  std::optional<double> epsilon;         // eV, for the +-Delta_j family
  double epsilon_spread = 0.0;           // eV, max deviation of per-scan estimates
};

struct FamilyClassification {
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<Family>> labels;  // per scan, per peak
};

// Links positive-side peaks across scans under the hypothesized slope laws
// {-1, 0, +1, -2, +2}, keeps disjoint trajectories greedily (most supporting
// scans first, then smallest fit residual), and labels them by fitted slope
// within slope_tol of a law. Peaks on no accepted trajectory are Unclassified.
FamilyClassification classify_families(const std::vector<PeakSet>& scans,
                                       double link_tol_eV,
                                       double slope_tol = 0.25);

struct GuessCandidate {
  std::vector<double> deltas;  // candidate |Delta_j|, ascending; branch signs
                               // are not observable in a single scan
  double score = 0.0;          // fraction of the predicted line set matched
};

// Brute-force baseline: try every n-subset of positive peak frequencies as a
// detuning set and score it against the full predicted line set. Refuses to
// run when C(#peaks, n) exceeds the cap; the cross-pump match has no such
// blow-up.
std::vector<GuessCandidate> educated_guess(const PeakSet& p, std::size_t n,
                                           double tol_eV,
                                           std::size_t subset_cap = 10000);

struct EnergyEstimate {
  double epsilon = 0.0;      // eV
  double uncertainty = 0.0;  // eV
  int support = 0;           // scans contributing
};

struct ExtractionResult {
  std::vector<EnergyEstimate> energies;
  MatchReport report;
  std::vector<Trajectory> trajectories;  // empty for the two-scan path
};

// End-to-end energy recovery: pairwise matching for exactly two scans,
// trajectory classification for three or more. Deterministic; an empty
// energy list is a valid outcome.
ExtractionResult extract_energies(const std::vector<PeakSet>& scans, double tol_eV);

}  // namespace etpa
