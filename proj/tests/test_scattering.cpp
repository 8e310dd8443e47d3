#include <cmath>
#include <complex>
#include <random>

#include <doctest.h>

#include "oracles/transfer_matrix.hpp"
#include "tunnellab/scattering.hpp"

using namespace tunnellab;

namespace {
const BarrierSystem kCanonical{0.5, 1.0, 5.0, 13.0};
const PacketSpec kPacket{0.5, 0.1};
}  // namespace

TEST_SUITE("scattering") {

TEST_CASE("flux conservation |T|^2 + |R|^2 = 1") {
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> energy(0.01, 0.99);
  std::uniform_real_distribution<double> width(0.0, 8.0);
  std::uniform_real_distribution<double> gap(0.0, 15.0);
  for (int trial = 0; trial < 20; ++trial) {
    BarrierSystem sys = kCanonical;
    sys.a = width(rng);
    sys.L = sys.a + gap(rng);
    for (int i = 0; i < 100; ++i) {
      const StationaryCoefficients c =
          stationary_coefficients(energy(rng), sys);
      CHECK(std::norm(c.T) + std::norm(c.R) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("vanishing barriers give free propagation") {
  BarrierSystem sys = kCanonical;
  sys.a = 0.0;
  for (double E : {0.2, 0.5, 0.8}) {
    const StationaryCoefficients c = stationary_coefficients(E, sys);
    CHECK(std::abs(c.T - 1.0) < 1e-14);
    CHECK(std::abs(c.R) < 1e-14);
    CHECK(std::abs(std::abs(c.alpha) - 1.0) < 1e-14);
    CHECK(std::abs(c.beta) < 1e-14);
  }
}

TEST_CASE("single barrier: unitarity and the symmetric-point magnitude") {
  for (int i = 1; i < 200; ++i) {
    const double E = i / 200.0;
    const SingleBarrierCoefficients c = single_barrier(E, kCanonical);
    CHECK(std::norm(c.T0) + std::norm(c.R0) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  // k = chi: Delta- = 0, |T0|^2 = 1/cosh^2(chi a).
  const SingleBarrierCoefficients c = single_barrier(0.5, kCanonical);
  const double ch = std::cosh(5.0 * std::sqrt(0.5));
  CHECK(std::norm(c.T0) == doctest::Approx(1.0 / (ch * ch)).epsilon(1e-13));

  BarrierSystem zero = kCanonical;
  zero.a = 0.0;
  const SingleBarrierCoefficients c0 = single_barrier(0.5, zero);
  CHECK(std::abs(c0.T0 - 1.0) < 1e-15);
  CHECK(std::abs(c0.R0) < 1e-15);
}

TEST_CASE("closed forms match the transfer-matrix oracle") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> energy(0.02, 0.98);
  for (int i = 0; i < 100; ++i) {
    const double E = energy(rng);
    const StationaryCoefficients c = stationary_coefficients(E, kCanonical);
    const auto tm = oracle::transfer_matrix_coefficients(E, kCanonical);
    CHECK(std::abs(c.T - tm.T) < 1e-10);
    CHECK(std::abs(c.R - tm.R) < 1e-10);
    CHECK(std::abs(c.alpha - tm.alpha) < 1e-10);
    CHECK(std::abs(c.beta - tm.beta) < 1e-10);
  }
  // A second geometry, thinner and wider apart.
  BarrierSystem other{0.5, 1.0, 2.5, 14.0};
  for (int i = 0; i < 100; ++i) {
    const double E = energy(rng);
    const StationaryCoefficients c = stationary_coefficients(E, other);
    const auto tm = oracle::transfer_matrix_coefficients(E, other);
    CHECK(std::abs(c.T - tm.T) < 1e-10);
    CHECK(std::abs(c.R - tm.R) < 1e-10);
  }
}

TEST_CASE("symmetric-point phase content of T") {
  // At k = chi the phase of T e^{ik(L+a)} collapses to the n-sum over
  // e^{i(2n+1)kd} alone (phi = 0); check against the closed-form argument
  // of 1/D computed directly.
  const double E = 0.5;
  const SpectralPrimitives p = spectral_primitives(E, kCanonical);
  const StationaryCoefficients c = stationary_coefficients(E, kCanonical);
  const Complex undone =
      c.T * std::polar(1.0, p.k * (kCanonical.L + kCanonical.a));
  const double d = kCanonical.separation();
  const double sh = std::sinh(p.chi * kCanonical.a);
  const double ch = std::cosh(p.chi * kCanonical.a);
  const Complex denom = Complex(ch * ch, 0.0) * std::polar(1.0, -p.k * d) +
                        Complex(sh * sh, 0.0) * std::polar(1.0, p.k * d);
  CHECK(std::arg(undone) ==
        doctest::Approx(std::arg(1.0 / denom)).epsilon(1e-13));
}

TEST_CASE("series terms: structure and geometric decay") {
  const double E = 0.47;
  const SingleBarrierCoefficients sb = single_barrier(E, kCanonical);
  const double q = std::norm(sb.R0);

  SUBCASE("transmitted n=0: magnitude 1/r^2 and phase kd + 2 phi") {
    const SpectralPrimitives p = spectral_primitives(E, kCanonical);
    const SeriesTerm t0 =
        series_term(Channel::transmitted, 0, E, kCanonical, kPacket);
    CHECK(std::abs(t0.value) ==
          doctest::Approx(1.0 / (p.r * p.r)).epsilon(1e-13));
    const double expected_phase =
        p.k * kCanonical.separation() + 2.0 * p.phi;
    CHECK(std::remainder(std::arg(t0.value) - expected_phase,
                         2.0 * std::numbers::pi) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t0.amplitude == doctest::Approx(gaussian_weight(E, kPacket) *
                                          std::norm(sb.T0))
                              .epsilon(1e-12));
  }

  SUBCASE("reflected n=0 is the L-independent face bounce") {
    const SeriesTerm r0 =
        series_term(Channel::reflected, 0, E, kCanonical, kPacket);
    BarrierSystem moved = kCanonical;
    moved.L = 20.0;
    const SeriesTerm r0_moved =
        series_term(Channel::reflected, 0, E, moved, kPacket);
    CHECK(std::abs(r0.value - r0_moved.value) < 1e-15);
    // -i Delta+ sinh(chi a) e^{i phi} / r has magnitude |R0|.
    CHECK(std::abs(r0.value) == doctest::Approx(std::abs(sb.R0)).epsilon(1e-13));
  }

  SUBCASE("consecutive term ratio is |R0|^2 on the round-trip channels") {
    for (Channel channel : {Channel::transmitted, Channel::cavity_right,
                            Channel::cavity_left}) {
      for (int n = 0; n < 4; ++n) {
        const double ratio =
            std::abs(series_term(channel, n + 1, E, kCanonical, kPacket).value) /
            std::abs(series_term(channel, n, E, kCanonical, kPacket).value);
        CHECK(ratio == doctest::Approx(q).epsilon(1e-12));
      }
    }
    // Reflected terms follow the same ratio from n = 1 on.
    for (int n = 1; n < 4; ++n) {
      const double ratio =
          std::abs(series_term(Channel::reflected, n + 1, E, kCanonical, kPacket)
                       .value) /
          std::abs(series_term(Channel::reflected, n, E, kCanonical, kPacket)
                       .value);
      CHECK(ratio == doctest::Approx(q).epsilon(1e-12));
    }
  }

  SUBCASE("amplitude matches g |T0|^2 |R0|^{2n}") {
    for (int n : {0, 3, 10}) {
      const SeriesTerm t =
          series_term(Channel::transmitted, n, E, kCanonical, kPacket);
      CHECK(t.amplitude ==
            doctest::Approx(gaussian_weight(E, kPacket) * std::norm(sb.T0) *
                            std::pow(q, n))
                .epsilon(1e-11));
    }
  }
}

TEST_CASE("partial sums converge to the closed forms with geometric error") {
  for (Channel channel : {Channel::transmitted, Channel::reflected,
                          Channel::cavity_right, Channel::cavity_left}) {
    for (double E : {0.21, 0.47, 0.5, 0.62, 0.88}) {
      const Complex closed = series_closed_form(channel, E, kCanonical);
      const double q = std::norm(single_barrier(E, kCanonical).R0);
      for (int N : {5, 10, 20, 200, 2000, 8000}) {
        const Complex partial = series_partial_sum(channel, N, E, kCanonical);
        const double bound = std::pow(q, N + 1) / (1.0 - q);
        CHECK(std::abs(closed - partial) <= bound * (1.0 + 1e-9) + 1e-13);
      }
    }
  }
}

TEST_CASE("partial sums hit T to 1e-11 once the geometric tail allows") {
  // q^{N+1}/(1-q) < 1e-12 pins N; away from E0 the decay is fast.
  const double E = 0.15;
  const double q = std::norm(single_barrier(E, kCanonical).R0);
  int N = 0;
  while (std::pow(q, N + 1) / (1.0 - q) >= 1e-12) ++N;
  const Complex closed =
      series_closed_form(Channel::transmitted, E, kCanonical);
  const Complex partial =
      series_partial_sum(Channel::transmitted, N, E, kCanonical);
  CHECK(std::abs(closed - partial) < 1e-11);
}

TEST_CASE("a = 0 collapses the series to its first term") {
  BarrierSystem sys = kCanonical;
  sys.a = 0.0;
  sys.L = 8.0;
  for (Channel channel : {Channel::transmitted, Channel::reflected,
                          Channel::cavity_right, Channel::cavity_left}) {
    const Complex closed = series_closed_form(channel, 0.37, sys);
    const Complex sum = series_partial_sum(channel, 0, 0.37, sys);
    CHECK(std::abs(closed - sum) < 1e-14);
  }
}

TEST_CASE("series rejects unknown channel names and negative indices") {
  CHECK_THROWS_AS(parse_channel("sideways"), std::invalid_argument);
  CHECK(parse_channel("cavity_left") == Channel::cavity_left);
  CHECK_THROWS_AS(series_term(Channel::transmitted, -1, 0.5, kCanonical, kPacket),
                  std::invalid_argument);
}

TEST_CASE("ors asymptotic form") {
  SUBCASE("constructed pole: k d = pi/2 at the symmetric point") {
    // At E = V0/2 the sin coefficient chi^2 - k^2 vanishes, so the
    // denominator is 2 k chi cos(kd): zero iff kd = pi/2 + n pi.
    BarrierSystem sys = kCanonical;
    const double k = std::sqrt(0.5);
    sys.L = sys.a + (std::numbers::pi / 2.0) / k;
    const OrsAsymptotic ors = ors_asymptotic(0.5, sys);
    CHECK(ors.pole);
  }
  SUBCASE("A is real and finite away from resonances") {
    for (double E : {0.2, 0.45, 0.7}) {
      const OrsAsymptotic ors = ors_asymptotic(E, kCanonical);
      if (!ors.pole) CHECK(std::isfinite(ors.A));
    }
  }
  SUBCASE("relative error against exact T shrinks as a grows") {
    const double E = 0.43;  // fixed non-resonant energy for all three widths
    double prev_err = 1e9;
    for (double a : {5.0, 10.0, 15.0}) {
      BarrierSystem sys = kCanonical;
      sys.a = a;
      sys.L = a + 8.0;
      const Complex exact = stationary_coefficients(E, sys).T;
      const Complex approx = ors_asymptotic(E, sys).T_asym;
      const double err = std::abs(exact - approx) / std::abs(exact);
      CHECK(err < prev_err);
      prev_err = err;
    }
    CHECK(prev_err < 1e-5);
  }
}

TEST_CASE("critique amplitude changes sign and blows up near resonances") {
  const std::vector<double> roots = resonance_energies(kCanonical);
  REQUIRE(!roots.empty());

  int sign_changes = 0;
  double prev = critique_amplitude(1.0 / 512, kCanonical, kPacket);
  double max_abs = 0.0;
  for (int i = 2; i < 512; ++i) {
    const double value =
        critique_amplitude(i / 512.0, kCanonical, kPacket);
    if (value * prev < 0.0) ++sign_changes;
    max_abs = std::max(max_abs, std::abs(value));
    prev = value;
  }
  CHECK(sign_changes >= 2);

  // Approaching a bracketed root of the denominator the value exceeds any
  // fixed bound.
  const double root = roots[1];
  double near = std::abs(critique_amplitude(root + 1e-9, kCanonical, kPacket));
  CHECK(near > 100.0 * max_abs);
}

TEST_CASE("resonance energies from scan + bisection") {
  SUBCASE("symmetric-point root appears exactly when cos(kd) = 0") {
    const double k = std::sqrt(0.5);
    for (int n = 0; n < 3; ++n) {
      BarrierSystem sys = kCanonical;
      sys.L = sys.a + (std::numbers::pi / 2.0 + n * std::numbers::pi) / k;
      const std::vector<double> roots = resonance_energies(sys);
      const bool has_center =
          std::any_of(roots.begin(), roots.end(),
                      [](double r) { return std::abs(r - 0.5) < 1e-9; });
      CHECK(has_center);
    }
  }
  SUBCASE("count equals the dense-scan sign changes") {
    const std::vector<double> roots = resonance_energies(kCanonical);
    int scan_changes = 0;
    auto den = [&](double E) {
      const SpectralPrimitives p = spectral_primitives(E, kCanonical);
      const double d = kCanonical.separation();
      return 2.0 * p.k * p.chi * std::cos(p.k * d) +
             (p.chi * p.chi - p.k * p.k) * std::sin(p.k * d);
    };
    double prev = den(1e-6);
    for (int i = 1; i <= 100000; ++i) {
      const double E = i * (1.0 - 2e-6) / 100000.0 + 1e-6;
      const double value = den(E);
      if (value * prev < 0.0) ++scan_changes;
      prev = value;
    }
    CHECK(static_cast<int>(roots.size()) == scan_changes);
  }
  SUBCASE("roots move monotonically under a small separation change") {
    const std::vector<double> base = resonance_energies(kCanonical);
    BarrierSystem nudged = kCanonical;
    nudged.L += 0.1;  // d: 8 -> 8.1
    const std::vector<double> moved = resonance_energies(nudged);
    // Larger cavities pull every resonance down in energy.
    for (std::size_t i = 0; i < std::min(base.size(), moved.size()); ++i) {
      CHECK(moved[i] < base[i]);
    }
  }
  SUBCASE("d = 0 has no resonances") {
    BarrierSystem sys = kCanonical;
    sys.L = sys.a;
    CHECK(resonance_energies(sys).empty());
  }
}

TEST_CASE("refined grid keeps the window and refines around poles") {
  const EnergyGrid grid =
      resonance_refined_grid(kPacket, kCanonical, 2048, 8.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid.nodes[i] > grid.nodes[i - 1]);
  }
  // Panels near each resonance are much finer than the background.
  for (double root : resonance_energies(kCanonical)) {
    const double width = resonance_width(root, kCanonical);
    int nearby = 0;
    for (double node : grid.nodes) {
      if (std::abs(node - root) < 10.0 * width) ++nearby;
    }
    CHECK(nearby >= 8);
  }
}

}  // TEST_SUITE
