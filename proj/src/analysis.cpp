#include "etpa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

namespace etpa {

namespace {

// Topographic prominence: height above the higher of the two bases, where a
// base is the minimum between the peak and the nearest strictly higher sample
// (or the data edge) on that side.
double prominence_at(const std::vector<double>& y, std::size_t i) {
  double left_base = y[i];
  for (std::size_t j = i; j-- > 0;) {
    left_base = std::min(left_base, y[j]);
    if (y[j] > y[i]) break;
  }
  double right_base = y[i];
  for (std::size_t j = i + 1; j < y.size(); ++j) {
    right_base = std::min(right_base, y[j]);
    if (y[j] > y[i]) break;
  }
  return y[i] - std::max(left_base, right_base);
}

struct RefinedPeak {
  double frequency;
  double magnitude;
};

RefinedPeak refine_parabolic(const Spectrum& sp, std::size_t i) {
  if (i == 0 || i + 1 >= sp.magnitudes.size())
    return {sp.frequencies[i], sp.magnitudes[i]};
  const double y1 = sp.magnitudes[i - 1];
  const double y2 = sp.magnitudes[i];
  const double y3 = sp.magnitudes[i + 1];
  const double den = y1 - 2.0 * y2 + y3;
  if (std::abs(den) < 1e-300) return {sp.frequencies[i], y2};
  double shift = 0.5 * (y1 - y3) / den;
  shift = std::clamp(shift, -0.5, 0.5);
  return {sp.frequencies[i] + shift * sp.omega_res,
          y2 - 0.25 * (y1 - y3) * shift};
}

std::vector<std::size_t> positive_side(const PeakSet& p) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < p.peaks.size(); ++i)
    if (p.peaks[i].frequency > 0.0) idx.push_back(i);
  return idx;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                 double& intercept, double& rms) {
  const std::size_t n = xs.size();
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (slope * xs[i] + intercept);
    ss += r * r;
  }
  rms = std::sqrt(ss / n);
  return slope;
}

Family family_of_slope(double slope, double slope_tol) {
  const double m = std::abs(slope);
  if (std::abs(m - 1.0) <= slope_tol) return Family::ShiftMinusOmega0;
  if (m <= slope_tol) return Family::Invariant;
  if (std::abs(m - 2.0) <= slope_tol) return Family::ShiftMinusTwoOmega0;
  return Family::Unclassified;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::ShiftMinusOmega0: return "shift-omega0";
    case Family::Invariant: return "invariant";
    case Family::ShiftMinusTwoOmega0: return "shift-2omega0";
    case Family::Unclassified: return "unclassified";
  }
  return "unclassified";
}

PeakSet detect_peaks(const Spectrum& sp, double min_prominence,
                     double dc_exclusion_eV, double omega0_eV) {
  if (sp.magnitudes.size() != sp.frequencies.size())
    throw std::invalid_argument("detect_peaks: malformed spectrum");
  if (min_prominence < 0.0 || dc_exclusion_eV < 0.0)
    throw std::invalid_argument("detect_peaks: negative threshold");

  PeakSet out;
  out.omega0 = omega0_eV;
  out.omega_res = sp.omega_res;

  const auto& y = sp.magnitudes;
  double global_max = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (std::abs(sp.frequencies[i]) >= dc_exclusion_eV)
      global_max = std::max(global_max, y[i]);
  if (global_max <= 0.0) return out;

  const double threshold = min_prominence * global_max;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (std::abs(sp.frequencies[i]) < dc_exclusion_eV) continue;
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    if (y[i] < threshold) continue;  // prominence cannot exceed height
    const double prom = prominence_at(y, i);
    if (prom < threshold) continue;
    const RefinedPeak refined = refine_parabolic(sp, i);
    out.peaks.push_back({refined.frequency, refined.magnitude, prom});
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.frequency < b.frequency; });
  return out;
}

std::vector<std::size_t> peaks_outside_bandwidth(const PeakSet& p,
                                                 double delta_omega_eV) {
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < p.peaks.size(); ++i)
    if (std::abs(p.peaks[i].frequency) > delta_omega_eV) flagged.push_back(i);
  return flagged;
}

MatchReport pair_match(const PeakSet& a, const PeakSet& b, double tol_eV) {
  if (std::abs(a.omega0 - b.omega0) < 1e-12)
    throw std::invalid_argument(
        "pair_match: identical pump frequencies (degenerate configuration)");
  if (tol_eV < std::max(a.omega_res, b.omega_res))
    throw std::invalid_argument(
        "pair_match: tolerance below the frequency resolution");

  const double dw = b.omega0 - a.omega0;
  const auto pos_a = positive_side(a);
  const auto pos_b = positive_side(b);

  struct Candidate {
    std::size_t ia, ib;
    double residual;
    double prominence_sum;
    double delta;
    double epsilon;
  };
  std::vector<Candidate> candidates;
  for (std::size_t ia : pos_a) {
    const Peak& pa = a.peaks[ia];
    for (std::size_t ib : pos_b) {
      const Peak& pb = b.peaks[ib];
      const double sep = pa.frequency - pb.frequency;
      // f = Delta_j branch: moves as -omega0, so the scans differ by +dw.
      const double r_minus = std::abs(sep - dw);
      if (r_minus <= tol_eV)
        candidates.push_back({ia, ib, r_minus, pa.prominence + pb.prominence,
                              pa.frequency, pa.frequency + a.omega0});
      // f = -Delta_j branch: mirrored, moves as +omega0.
      const double r_plus = std::abs(sep + dw);
      if (r_plus <= tol_eV)
        candidates.push_back({ia, ib, r_plus, pa.prominence + pb.prominence,
                              -pa.frequency, a.omega0 - pa.frequency});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) {
              if (x.residual != y.residual) return x.residual < y.residual;
              return x.prominence_sum > y.prominence_sum;
            });

  MatchReport report;
  report.family_labels.assign(
      2, std::vector<Family>());
  report.family_labels[0].assign(a.peaks.size(), Family::Unclassified);
  report.family_labels[1].assign(b.peaks.size(), Family::Unclassified);

  std::set<std::size_t> used_a, used_b;
  for (const auto& c : candidates) {
    if (used_a.count(c.ia) || used_b.count(c.ib)) continue;
    used_a.insert(c.ia);
    used_b.insert(c.ib);
    report.pairs.push_back({c.ia, c.ib, a.peaks[c.ia].frequency,
                            b.peaks[c.ib].frequency, c.delta, c.epsilon,
                            c.residual});
    report.family_labels[0][c.ia] = Family::ShiftMinusOmega0;
    report.family_labels[1][c.ib] = Family::ShiftMinusOmega0;
  }
  std::sort(report.pairs.begin(), report.pairs.end(),
            [](const MatchedPair& x, const MatchedPair& y) {
              return x.epsilon < y.epsilon;
            });

  // Leftovers: tag the other two families where the separation law fits.
  for (std::size_t ia : pos_a) {
    if (used_a.count(ia)) continue;
    for (std::size_t ib : pos_b) {
      if (used_b.count(ib)) continue;
      const double sep = a.peaks[ia].frequency - b.peaks[ib].frequency;
      if (std::abs(sep) <= tol_eV) {
        report.family_labels[0][ia] = Family::Invariant;
        report.family_labels[1][ib] = Family::Invariant;
        used_a.insert(ia);
        used_b.insert(ib);
        break;
      }
      if (std::abs(sep - 2.0 * dw) <= tol_eV || std::abs(sep + 2.0 * dw) <= tol_eV) {
        report.family_labels[0][ia] = Family::ShiftMinusTwoOmega0;
        report.family_labels[1][ib] = Family::ShiftMinusTwoOmega0;
        used_a.insert(ia);
        used_b.insert(ib);
        break;
      }
    }
  }
  for (std::size_t ia : pos_a)
    if (!used_a.count(ia)) report.unmatched.emplace_back(0, ia);
  for (std::size_t ib : pos_b)
    if (!used_b.count(ib)) report.unmatched.emplace_back(1, ib);
  return report;
}

FamilyClassification classify_families(const std::vector<PeakSet>& scans,
                                       double link_tol_eV, double slope_tol) {
  if (scans.size() < 2)
    throw std::invalid_argument("classify_families: at least two scans required");
  for (std::size_t s = 1; s < scans.size(); ++s)
    for (std::size_t t = 0; t < s; ++t)
      if (std::abs(scans[s].omega0 - scans[t].omega0) < 1e-12)
        throw std::invalid_argument(
            "classify_families: pump frequencies must be pairwise distinct");

  const std::size_t n_scans = scans.size();
  std::vector<std::vector<std::size_t>> pos(n_scans);
  for (std::size_t s = 0; s < n_scans; ++s) pos[s] = positive_side(scans[s]);

  static constexpr double kLaws[] = {-1.0, 0.0, 1.0, -2.0, 2.0};

  struct Candidate {
    int law_index;
    int support;
    double rms;
    double prominence_sum;
    double slope, intercept;
    std::vector<int> peak_index;   // -1 where unlinked
    std::vector<std::pair<std::size_t, std::size_t>> key;
  };
  std::vector<Candidate> candidates;
  std::set<std::pair<int, std::vector<std::pair<std::size_t, std::size_t>>>> seen;

  for (std::size_t anchor_scan = 0; anchor_scan < n_scans; ++anchor_scan) {
    for (std::size_t ai : pos[anchor_scan]) {
      const double f0 = scans[anchor_scan].peaks[ai].frequency;
      const double w0 = scans[anchor_scan].omega0;
      for (int li = 0; li < 5; ++li) {
        const double law = kLaws[li];
        Candidate c;
        c.law_index = li;
        c.peak_index.assign(n_scans, -1);
        std::vector<double> xs, ys;
        double prom_sum = 0.0;
        for (std::size_t s = 0; s < n_scans; ++s) {
          const double predicted = f0 + law * (scans[s].omega0 - w0);
          double best = std::numeric_limits<double>::infinity();
          int best_idx = -1;
          for (std::size_t pi : pos[s]) {
            const double err = std::abs(scans[s].peaks[pi].frequency - predicted);
            if (err < best) {
              best = err;
              best_idx = static_cast<int>(pi);
            }
          }
          if (best_idx >= 0 && best <= link_tol_eV) {
            c.peak_index[s] = best_idx;
            xs.push_back(scans[s].omega0);
            ys.push_back(scans[s].peaks[static_cast<std::size_t>(best_idx)].frequency);
            prom_sum += scans[s].peaks[static_cast<std::size_t>(best_idx)].prominence;
          }
        }
        c.support = static_cast<int>(xs.size());
        if (c.support < 2) continue;
        c.slope = fit_slope(xs, ys, c.intercept, c.rms);
        c.prominence_sum = prom_sum;
        for (std::size_t s = 0; s < n_scans; ++s)
          if (c.peak_index[s] >= 0)
            c.key.emplace_back(s, static_cast<std::size_t>(c.peak_index[s]));
        if (seen.insert({li, c.key}).second) candidates.push_back(std::move(c));
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) {
              if (x.support != y.support) return x.support > y.support;
              if (x.rms != y.rms) return x.rms < y.rms;
              return x.prominence_sum > y.prominence_sum;
            });

  FamilyClassification out;
  out.labels.resize(n_scans);
  for (std::size_t s = 0; s < n_scans; ++s)
    out.labels[s].assign(scans[s].peaks.size(), Family::Unclassified);

  // A peak is claimed at most once per slope law: coincident lines of
  // different families legitimately share one spectral peak at one pump,
  // while two same-law lines never cross at a fixed omega0.
  std::set<std::tuple<int, std::size_t, std::size_t>> used;
  for (const auto& c : candidates) {
    bool free = true;
    for (const auto& k : c.key)
      if (used.count({c.law_index, k.first, k.second})) { free = false; break; }
    if (!free) continue;
    for (const auto& k : c.key) used.insert({c.law_index, k.first, k.second});

    Trajectory traj;
    traj.slope = c.slope;
    traj.intercept = c.intercept;
    traj.rms_residual = c.rms;
    traj.support = c.support;
    traj.peak_index = c.peak_index;
    traj.family = family_of_slope(c.slope, slope_tol);

    if (traj.family == Family::ShiftMinusOmega0) {
      // f = Delta_j = epsilon_j - omega0 on the falling branch,
      // f = omega0 - epsilon_j on the mirrored rising branch.
      std::vector<double> estimates;
      for (std::size_t s = 0; s < n_scans; ++s) {
        if (c.peak_index[s] < 0) continue;
        const double f = scans[s].peaks[static_cast<std::size_t>(c.peak_index[s])].frequency;
        estimates.push_back(c.slope < 0.0 ? f + scans[s].omega0
                                          : scans[s].omega0 - f);
      }
      const double mean =
          std::accumulate(estimates.begin(), estimates.end(), 0.0) /
          static_cast<double>(estimates.size());
      double spread = 0.0;
      for (double e : estimates) spread = std::max(spread, std::abs(e - mean));
      traj.epsilon = mean;
      traj.epsilon_spread = spread;
    }
    for (const auto& k : c.key)
      if (out.labels[k.first][k.second] == Family::Unclassified)
        out.labels[k.first][k.second] = traj.family;
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

std::vector<GuessCandidate> educated_guess(const PeakSet& p, std::size_t n,
                                           double tol_eV, std::size_t subset_cap) {
  std::vector<double> observed;
  for (const auto& pk : p.peaks)
    if (pk.frequency > 0.0) observed.push_back(pk.frequency);
  std::sort(observed.begin(), observed.end());

  if (n > observed.size())
    throw std::invalid_argument(
        "educated_guess: n exceeds the number of positive-side peaks");

  if (n == 0) {
    // No detunings predict no lines beyond DC; vacuously complete.
    return {GuessCandidate{{}, 1.0}};
  }

  double subsets = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    subsets = subsets * static_cast<double>(observed.size() - i) /
              static_cast<double>(i + 1);
  if (subsets > static_cast<double>(subset_cap))
    throw std::runtime_error(
        "educated_guess: C(" + std::to_string(observed.size()) + ", " +
        std::to_string(n) + ") = " + std::to_string(static_cast<long long>(subsets)) +
        " candidate subsets exceed the cap of " + std::to_string(subset_cap) +
        "; use measurements at a second pump frequency and extract_energies instead");

  const auto matched_fraction = [&](const std::vector<double>& deltas) {
    const auto predicted = predicted_frequencies(deltas);
    std::vector<double> lines;
    for (double f : predicted)
      if (f > 1e-12) lines.push_back(f);
    std::vector<double> distinct;
    for (double f : lines)
      if (distinct.empty() || f - distinct.back() > 1e-9) distinct.push_back(f);
    std::size_t hit = 0;
    for (double f : distinct) {
      auto it = std::lower_bound(observed.begin(), observed.end(), f);
      double best = std::numeric_limits<double>::infinity();
      if (it != observed.end()) best = std::min(best, std::abs(*it - f));
      if (it != observed.begin()) best = std::min(best, std::abs(*(it - 1) - f));
      if (best <= tol_eV) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(distinct.size());
  };

  std::vector<GuessCandidate> out;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    std::vector<double> deltas(n);
    for (std::size_t i = 0; i < n; ++i) deltas[i] = observed[pick[i]];
    out.push_back({deltas, matched_fraction(deltas)});

    // next combination
    std::size_t i = n;
    while (i-- > 0) {
      if (pick[i] + (n - i) < observed.size()) {
        ++pick[i];
        for (std::size_t j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (i == 0) {
        std::stable_sort(out.begin(), out.end(),
                         [](const GuessCandidate& a, const GuessCandidate& b) {
                           return a.score > b.score;
                         });
        return out;
      }
    }
  }
}

ExtractionResult extract_energies(const std::vector<PeakSet>& scans, double tol_eV) {
  if (scans.size() < 2)
    throw std::invalid_argument(
        "extract_energies: measurements at two or more pump frequencies required");

  ExtractionResult result;
  double omega_res = 0.0;
  for (const auto& s : scans) omega_res = std::max(omega_res, s.omega_res);

  if (scans.size() == 2) {
    result.report = pair_match(scans[0], scans[1], tol_eV);
    for (const auto& pair : result.report.pairs)
      result.energies.push_back(
          {pair.epsilon, std::max(pair.residual, omega_res / 2.0), 2});
  } else {
    const auto classification = classify_families(scans, tol_eV);
    result.trajectories = classification.trajectories;
    result.report.family_labels = classification.labels;
    for (const auto& traj : classification.trajectories) {
      if (!traj.epsilon) continue;
      result.energies.push_back(
          {*traj.epsilon, std::max(traj.epsilon_spread, omega_res / 2.0),
           traj.support});
    }
  }

  std::sort(result.energies.begin(), result.energies.end(),
            [](const EnergyEstimate& a, const EnergyEstimate& b) {
              return a.epsilon < b.epsilon;
            });
  // Merge duplicate estimates of one level (e.g. the same trajectory seen from
  // both branches); keep the better-supported one.
  std::vector<EnergyEstimate> merged;
  for (const auto& e : result.energies) {
    if (!merged.empty() && e.epsilon - merged.back().epsilon <= tol_eV / 2.0) {
      if (e.support > merged.back().support) merged.back() = e;
      continue;
    }
    merged.push_back(e);
  }
  result.energies = std::move(merged);
  return result;
}

}  // namespace etpa
