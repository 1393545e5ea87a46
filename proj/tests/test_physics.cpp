#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "etpa/level_system.hpp"

using namespace etpa;

TEST_CASE("hbar * c reproduces the standard 197.327 eV nm") {
  PhysicalConstants consts;
  CHECK(consts.hbar * consts.c ==
        doctest::Approx(197.3269804).epsilon(1e-4));
}

TEST_CASE("center frequency of a 405 nm pump is 1.5306 eV") {
  CHECK(std::abs(center_frequency(405.0) - 1.5306) < 1e-4);
}

TEST_CASE("center frequency of a 455.9 nm pump is 1.3598 eV") {
  CHECK(std::abs(center_frequency(455.9) - 1.3598) < 1e-4);
}

TEST_CASE("center frequency vanishes in the long-wavelength limit") {
  CHECK(center_frequency(1e15) < 1e-12);
  CHECK(center_frequency(2.0) == doctest::Approx(2.0 * center_frequency(4.0)));
}

TEST_CASE("center frequency rejects non-positive wavelengths") {
  CHECK_THROWS_AS(center_frequency(0.0), std::domain_error);
  CHECK_THROWS_AS(center_frequency(-405.0), std::domain_error);
}

TEST_CASE("LevelSystem validates its invariants") {
  CHECK_THROWS_AS(LevelSystem(0.0, {}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(LevelSystem(0.0, {{1.0}, {0.5}}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(LevelSystem(0.0, {{1.0}, {1.0}}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(LevelSystem(1.0, {{0.5}}, 0.5), std::invalid_argument);
  CHECK_NOTHROW(LevelSystem(0.0, {{0.86}, {1.67}}, 3.06));
}

TEST_CASE("detunings of the two-state example system") {
  const LevelSystem sys(0.0, {{0.86}, {1.67}}, 3.06);
  const PumpConfig pump(1.53);
  const auto d = detunings(sys, pump);
  REQUIRE(d.size() == 2);
  CHECK(d.deltas[0] == doctest::Approx(-0.67).epsilon(1e-12));
  CHECK(d.deltas[1] == doctest::Approx(0.14).epsilon(1e-12));
  CHECK(d.amplitudes[0] == doctest::Approx(1.0 / -0.67));
  CHECK(d.amplitudes[1] == doctest::Approx(1.0 / 0.14));
}

TEST_CASE("detunings round-trip back to the input energies") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 2.8);
  for (int trial = 0; trial < 50; ++trial) {
    const double omega0 = u(rng);
    double e1 = u(rng), e2 = u(rng);
    if (e1 > e2) std::swap(e1, e2);
    if (e2 - e1 < 1e-3) continue;
    if (std::abs(e1 - omega0) < 0.02 || std::abs(e2 - omega0) < 0.02) continue;
    const LevelSystem sys(0.0, {{e1}, {e2}}, 2.0 * omega0);
    const auto d = detunings(sys, PumpConfig(omega0));
    CHECK(d.deltas[0] + omega0 == doctest::Approx(e1).epsilon(1e-15));
    CHECK(d.deltas[1] + omega0 == doctest::Approx(e2).epsilon(1e-15));
  }
}

TEST_CASE("a resonant intermediate state is a virtual-state violation") {
  const LevelSystem sys(0.0, {{1.53}}, 3.06);
  CHECK_THROWS_AS(detunings(sys, PumpConfig(1.53)), VirtualStateError);
  // just outside the default 10 meV guard
  const LevelSystem ok(0.0, {{1.545}}, 3.06);
  CHECK_NOTHROW(detunings(ok, PumpConfig(1.53)));
}

TEST_CASE("detunings require the two-photon resonance to hold") {
  const LevelSystem sys(0.0, {{0.86}}, 3.00);  // epsilon_f != 2 * omega0
  CHECK_THROWS_AS(detunings(sys, PumpConfig(1.53)), std::invalid_argument);
}

TEST_CASE("nonzero epsilon_i shifts every detuning") {
  const LevelSystem sys(0.2, {{1.06}, {1.87}}, 3.26);
  const auto d = detunings(sys, PumpConfig(1.53));
  CHECK(d.deltas[0] == doctest::Approx(-0.67).epsilon(1e-12));
  CHECK(d.deltas[1] == doctest::Approx(0.14).epsilon(1e-12));
}

TEST_CASE("amplitude sign equals the product of dipole and detuning signs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double mu_fj = u(rng), mu_ji = u(rng);
    const double delta = u(rng);
    if (std::abs(delta) < 0.05 || mu_fj == 0.0 || mu_ji == 0.0) continue;
    const double omega0 = 2.5;
    const LevelSystem sys(0.0, {{omega0 + delta, mu_fj, mu_ji}}, 2.0 * omega0);
    const auto d = detunings(sys, PumpConfig(omega0));
    const double expected_sign =
        (mu_fj * mu_ji > 0 ? 1.0 : -1.0) * (delta > 0 ? 1.0 : -1.0);
    CHECK(d.amplitudes[0] * expected_sign > 0.0);
  }
}

TEST_CASE("predicted frequencies for a single state") {
  const auto freqs = predicted_frequencies(std::vector<double>{0.5});
  REQUIRE(freqs.size() == 5);
  const std::vector<double> expected{-1.0, -0.5, 0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(freqs[i] == doctest::Approx(expected[i]));
  CHECK(count_distinct_nonzero(freqs) == 4);  // 2 (N+1) N with N = 1
}

TEST_CASE("predicted frequencies for the two-state example system") {
  const auto freqs = predicted_frequencies(std::vector<double>{-0.67, 0.14});
  CHECK(count_distinct_nonzero(freqs) == 12);
  const std::vector<double> expected{0.14, 0.28, 0.53, 0.67, 0.81, 1.34};
  for (double f : expected) {
    const bool plus = std::any_of(freqs.begin(), freqs.end(), [&](double x) {
      return std::abs(x - f) < 1e-12;
    });
    const bool minus = std::any_of(freqs.begin(), freqs.end(), [&](double x) {
      return std::abs(x + f) < 1e-12;
    });
    CHECK(plus);
    CHECK(minus);
  }
}

TEST_CASE("predicted frequency set is symmetric under negation") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> deltas;
    for (int j = 0; j < 4; ++j) {
      double d = u(rng);
      if (std::abs(d) < 0.05) d = 0.05;
      deltas.push_back(d);
    }
    const auto freqs = predicted_frequencies(deltas);
    for (double f : freqs) {
      const bool mirrored = std::any_of(freqs.begin(), freqs.end(), [&](double x) {
        return std::abs(x + f) < 1e-12;
      });
      CHECK(mirrored);
    }
  }
}

TEST_CASE("distinct nonzero line count follows 2(N+1)N for N = 1..6") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int n = 1; n <= 6; ++n) {
    int done = 0;
    while (done < 20) {
      std::vector<double> deltas;
      while (deltas.size() < static_cast<std::size_t>(n)) {
        const double d = u(rng);
        if (std::abs(d) < 0.02) continue;
        deltas.push_back(d);
      }
      const auto freqs = predicted_frequencies(deltas);
      // rejection-sample accidental collisions, they merge lines by construction
      bool collision = false;
      for (std::size_t i = 1; i < freqs.size(); ++i)
        if (freqs[i] - freqs[i - 1] > 1e-12 && freqs[i] - freqs[i - 1] < 1e-6)
          collision = true;
      if (collision) continue;
      CHECK(count_distinct_nonzero(freqs) ==
            static_cast<std::size_t>(2 * (n + 1) * n));
      ++done;
    }
  }
}

TEST_CASE("degenerate detuning collisions merge instead of erroring") {
  // Delta_2 = 2 Delta_1 makes Delta_1 + Delta_1 collide with Delta_2
  const auto freqs = predicted_frequencies(std::vector<double>{0.3, 0.6});
  CHECK(count_distinct_nonzero(freqs) < 12);
  CHECK(freqs.size() == 13);  // multiset keeps multiplicity
}

TEST_CASE("entanglement time from crystal parameters") {
  const auto degenerate = entanglement_time_from_crystal(10.0, 5.0, 5.0);
  CHECK(degenerate.te_fs == 0.0);
  CHECK(degenerate.sign == 0);

  const auto forward = entanglement_time_from_crystal(2.0, 5.0, 2.0);
  CHECK(forward.te_fs == doctest::Approx(3.0));
  CHECK(forward.sign == 1);

  const auto reversed = entanglement_time_from_crystal(2.0, 2.0, 5.0);
  CHECK(reversed.te_fs == doctest::Approx(3.0));
  CHECK(reversed.sign == -1);

  CHECK(entanglement_time_from_crystal(4.0, 5.0, 2.0).te_fs ==
        doctest::Approx(2.0 * forward.te_fs));
  CHECK_THROWS_AS(entanglement_time_from_crystal(0.0, 5.0, 2.0),
                  std::domain_error);
}

TEST_CASE("entanglement time from a 7.4 meV bandwidth under both conventions") {
  const double h_based =
      entanglement_time_from_bandwidth(0.0074, BandwidthConvention::PlanckH);
  CHECK(h_based == doctest::Approx(1755.75).epsilon(1e-4));
  // within 1% of the 1745 fs reference value
  CHECK(std::abs(h_based - 1745.0) / 1745.0 < 0.01);

  const double hbar_based =
      entanglement_time_from_bandwidth(0.0074, BandwidthConvention::ReducedHbar);
  CHECK(hbar_based == doctest::Approx(279.4).epsilon(1e-3));

  CHECK(entanglement_time_from_bandwidth(0.0148) ==
        doctest::Approx(h_based / 2.0));
  CHECK_THROWS_AS(entanglement_time_from_bandwidth(0.0), std::domain_error);
}
