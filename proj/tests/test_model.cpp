#include <cmath>
#include <numbers>
#include <stdexcept>

#include <doctest.h>

#include "tunnellab/model.hpp"

using namespace tunnellab;

namespace {
const BarrierSystem kCanonical{0.5, 1.0, 5.0, 13.0};
const PacketSpec kPacket{0.5, 0.1};
}  // namespace

TEST_SUITE("model") {

TEST_CASE("spectral primitives at the symmetric point k = chi") {
  // 2m = V0 = 1, E = V0/2: k = chi = sqrt(0.5).
  const SpectralPrimitives p = spectral_primitives(0.5, kCanonical);
  CHECK(p.k == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(p.chi == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(p.delta_minus == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.delta_plus == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.phi == doctest::Approx(0.0).epsilon(1e-15));
  // r = cosh(5 sqrt(0.5)); 30-digit reference 17.171236554010710848.
  CHECK(p.r == doctest::Approx(17.171236554010710848).epsilon(1e-14));
}

TEST_CASE("spectral primitives frozen values at E = 0.25") {
  // Direct evaluation of the defining formulas at 30-digit precision:
  // k = 1/2, chi = sqrt(3)/2, Delta+ = 2/sqrt(3), Delta- = 1/sqrt(3).
  const SpectralPrimitives p = spectral_primitives(0.25, kCanonical);
  CHECK(p.k == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.chi == doctest::Approx(0.86602540378443864676).epsilon(1e-15));
  CHECK(p.delta_plus == doctest::Approx(1.154700538379251529).epsilon(1e-15));
  CHECK(p.delta_minus == doctest::Approx(0.57735026918962576451).epsilon(1e-15));
  CHECK(p.r == doctest::Approx(43.855825132041227361).epsilon(1e-14));
  CHECK(p.phi == doctest::Approx(-0.52344867153483173753).epsilon(1e-14));
}

TEST_CASE("zero-width barriers are transparent: r = 1, phi = 0") {
  BarrierSystem sys = kCanonical;
  sys.a = 0.0;
  for (double E : {0.1, 0.37, 0.5, 0.93}) {
    const SpectralPrimitives p = spectral_primitives(E, sys);
    CHECK(p.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.phi == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("algebraic identities hold across the window") {
  for (int i = 1; i < 400; ++i) {
    const double E = i / 400.0;
    const SpectralPrimitives p = spectral_primitives(E, kCanonical);
    // Delta+ - Delta- = k/chi, Delta+ + Delta- = chi/k, so
    // Delta+^2 - Delta-^2 = 1.
    CHECK(p.delta_plus * p.delta_plus - p.delta_minus * p.delta_minus ==
          doctest::Approx(1.0).epsilon(1e-12));
    // r as the modulus of cosh(chi a) + i Delta- sinh(chi a).
    const double sh = std::sinh(p.chi * kCanonical.a);
    const double ch = std::cosh(p.chi * kCanonical.a);
    const double modulus = std::hypot(ch, p.delta_minus * sh);
    CHECK(p.r == doctest::Approx(modulus).epsilon(1e-12));
  }
}

TEST_CASE("phi is continuous in energy (principal branch suffices)") {
  double prev = spectral_primitives(1e-4, kCanonical).phi;
  for (int i = 2; i < 10000; ++i) {
    const double E = i * 1e-4;
    const double phi = spectral_primitives(E, kCanonical).phi;
    CHECK(std::abs(phi - prev) < 0.05);
    prev = phi;
  }
  // Range never leaves the principal branch.
  CHECK(std::abs(prev) < std::numbers::pi / 2);
}

TEST_CASE("domain errors outside the tunneling regime") {
  CHECK_THROWS_AS(spectral_primitives(0.0, kCanonical), std::domain_error);
  CHECK_THROWS_AS(spectral_primitives(1.0, kCanonical), std::domain_error);
  CHECK_THROWS_AS(spectral_primitives(-0.5, kCanonical), std::domain_error);
  CHECK_THROWS_AS(spectral_primitives(1.5, kCanonical), std::domain_error);
}

TEST_CASE("system and packet validation name the offending field") {
  BarrierSystem sys = kCanonical;
  sys.m = -1.0;
  CHECK_THROWS_WITH_AS(sys.validate(), doctest::Contains("m"),
                       std::invalid_argument);
  sys = kCanonical;
  sys.L = 2.0;  // < a
  CHECK_THROWS_WITH_AS(sys.validate(), doctest::Contains("L"),
                       std::invalid_argument);

  PacketSpec packet{0.5, 0.6};  // E0 +- delta pokes out of (0, 1)
  CHECK_THROWS_AS(packet.validate(kCanonical), std::invalid_argument);
  packet = {1.5, 0.1};
  CHECK_THROWS_WITH_AS(packet.validate(kCanonical), doctest::Contains("E0"),
                       std::invalid_argument);

  // 3-sigma clipping is a warning condition, not an error.
  packet = {0.5, 0.2};
  CHECK_NOTHROW(packet.validate(kCanonical));
  CHECK(packet.tails_clipped(kCanonical));
  CHECK_FALSE(kPacket.tails_clipped(kCanonical));
}

TEST_CASE("gaussian weight reference values") {
  CHECK(gaussian_weight(0.5, kPacket) ==
        doctest::Approx(1.0 / (std::sqrt(2.0 * std::numbers::pi) * 0.1))
            .epsilon(1e-15));
  CHECK(gaussian_weight(0.6, kPacket) ==
        doctest::Approx(gaussian_weight(0.5, kPacket) * std::exp(-0.5))
            .epsilon(1e-15));
  // E0 = V0/2, delta = V0/10, V0 = 1: peak value 10/sqrt(2 pi).
  CHECK(gaussian_weight(0.5, kPacket) ==
        doctest::Approx(3.9894228040143267794).epsilon(1e-15));
}

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
  // Order p is exact through degree 2p-1; check x^9 on [0, 1] with p = 5.
  const QuadratureRule& rule = gauss_legendre_rule(5);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const double x = 0.5 * (rule.points[i] + 1.0);
    acc += 0.5 * rule.weights[i] * std::pow(x, 9);
  }
  CHECK(acc == doctest::Approx(0.1).epsilon(1e-14));

  // Known 2-point nodes +-1/sqrt(3).
  const QuadratureRule& two = gauss_legendre_rule(2);
  CHECK(two.points[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(two.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("energy grid covers the clipped window") {
  SUBCASE("8 sigma exceeds (0, V0): clipped to the guarded window") {
    const EnergyGrid grid = build_energy_grid(kPacket, kCanonical, 2048, 8.0);
    const double eps = kGridGuardFraction * kCanonical.V0;
    CHECK(grid.nodes.front() > eps);
    CHECK(grid.nodes.front() < 1e-3);
    CHECK(grid.nodes.back() < kCanonical.V0 - eps);
    CHECK(grid.nodes.back() > kCanonical.V0 - 1e-3);
  }
  SUBCASE("3 sigma fits: no clipping") {
    const EnergyGrid grid = build_energy_grid(kPacket, kCanonical, 2048, 3.0);
    CHECK(grid.nodes.front() == doctest::Approx(0.2).epsilon(1e-3));
    CHECK(grid.nodes.back() == doctest::Approx(0.8).epsilon(1e-3));
    // Weights reproduce the interval length for the constant function.
    double total = 0.0;
    for (double w : grid.weights) total += w;
    CHECK(total == doctest::Approx(0.6).epsilon(1e-13));
  }
  SUBCASE("nodes strictly increasing, weights positive") {
    const EnergyGrid grid = build_energy_grid(kPacket, kCanonical, 512, 6.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      CHECK(grid.nodes[i] > grid.nodes[i - 1]);
    }
    for (double w : grid.weights) CHECK(w > 0.0);
  }
  SUBCASE("tiny node budget is rejected") {
    CHECK_THROWS_AS(build_energy_grid(kPacket, kCanonical, 8, 6.0),
                    std::invalid_argument);
  }
}

TEST_CASE("quadrature of g approaches 1 within the gaussian tail bound") {
  // The missing mass is the clipped tails: Q(z) = erfc(z/sqrt(2))/2 per side.
  for (double width : {6.0, 8.0, 10.0}) {
    const EnergyGrid grid = build_energy_grid(kPacket, kCanonical, 2048, width);
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      g[i] = gaussian_weight(grid.nodes[i], kPacket);
    }
    const double mass = weighted_sum(grid.weights, g);
    const double z_lo = (kPacket.E0 - grid.nodes.front()) / kPacket.delta;
    const double z_hi = (grid.nodes.back() - kPacket.E0) / kPacket.delta;
    const double tail = 0.5 * std::erfc(z_lo / std::sqrt(2.0)) +
                        0.5 * std::erfc(z_hi / std::sqrt(2.0));
    CHECK(std::abs(1.0 - mass) <= tail + 1e-12);
    CHECK(1.0 - mass == doctest::Approx(tail).epsilon(1e-3));
  }
}

}  // TEST_SUITE
