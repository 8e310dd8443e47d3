#pragma once

#include <complex>
#include <string_view>
#include <vector>

#include "tunnellab/model.hpp"

namespace tunnellab {

using Complex = std::complex<double>;

/// Stationary-state coefficients for a unit plane wave incident from the
/// left on the double barrier:
///   psi_E(x) = e^{ikx} + R e^{-ikx}                     x < 0
///   psi_E(x) = alpha e^{ik(x-a)} + beta e^{-ik(x-a)}    a < x < L
///   psi_E(x) = T e^{ikx}                                x > L + a
/// The potential is real, so |T|^2 + |R|^2 = 1.
struct StationaryCoefficients {
  Complex T;
  Complex R;
  Complex alpha;
  Complex beta;
};

/// Coefficients of a single barrier of the same height and width:
///   T0 = 1 / (cosh chi a + i Delta- sinh chi a),  R0 = -i Delta+ sinh(chi a) T0.
struct SingleBarrierCoefficients {
  Complex T0;
  Complex R0;
};

/// Bounce channels of the multiple-reflection expansion. Term n of a channel
/// is the history with n completed cavity round trips.
enum class Channel { transmitted, reflected, cavity_right, cavity_left };

std::string_view to_string(Channel channel);
Channel parse_channel(std::string_view name);  // std::invalid_argument on unknown

/// One term of a channel's multiple-reflection series. `value` carries the
/// full complex term (phase included); `amplitude` is g(E) |value|, the
/// spectral amplitude of the corresponding sub-packet. For the transmitted
/// channel this equals g |T0|^2 |R0|^{2n}.
struct SeriesTerm {
  Channel channel;
  int n;
  Complex value;
  double amplitude;
};

StationaryCoefficients stationary_coefficients(double E, const BarrierSystem& sys);
SingleBarrierCoefficients single_barrier(double E, const BarrierSystem& sys);

/// Opaque-barrier (chi a -> infinity) limit of T and the cavity resonance
/// factor A = 2 k chi / (2 k chi cos(kd) + (chi^2 - k^2) sin(kd)).
/// `pole` is set when the denominator of A is within tolerance of zero;
/// A and T_asym are then IEEE infinities or huge, not an error.
struct OrsAsymptotic {
  Complex T_asym;
  double A;
  bool pole;
};

OrsAsymptotic ors_asymptotic(double E, const BarrierSystem& sys);

/// The spectral amplitude the opaque-barrier approximation implicitly treats
/// as Gaussian: g(E) e^{-2 chi a} A 4 k chi / (k^2 + chi^2). Signed, and
/// unbounded near resonances (IEEE infinities are reported, not thrown).
double critique_amplitude(double E, const BarrierSystem& sys,
                          const PacketSpec& spec);

SeriesTerm series_term(Channel channel, int n, double E,
                       const BarrierSystem& sys, const PacketSpec& spec);

/// Sum of terms 0..N in fixed ascending order. Converges geometrically
/// (ratio |R0|^2) to series_closed_form(channel).
Complex series_partial_sum(Channel channel, int n_terms, double E,
                           const BarrierSystem& sys);

/// The closed form each channel's series resums to: T e^{ik(L+a)} for the
/// transmitted channel (the series carries no free-propagation prefactor),
/// and R, alpha, beta for the others.
Complex series_closed_form(Channel channel, double E, const BarrierSystem& sys);

/// All roots of 2 k chi cos(kd) + (chi^2 - k^2) sin(kd) in the open
/// tunneling window, located by a 10^4-point sign scan plus bisection to
/// 1e-12 V0. Empty when d = 0 (the denominator is then 2 k chi > 0).
std::vector<double> resonance_energies(const BarrierSystem& sys);

/// Breit-Wigner width estimate for a resonance at E_res: the cavity leaks
/// through either barrier with probability |T0|^2 per traversal, so
/// Gamma ~ 2 |T0|^2 / t_roundtrip with t_roundtrip = 2d/v + 2 tau.
double resonance_width(double E_res, const BarrierSystem& sys);

/// Energy grid for wave-packet synthesis against the exact coefficients.
/// Extends build_energy_grid with geometrically graded panels around each
/// resonance: T(E) has near-real poles of width down to ~1e-6 V0 for cavity
/// separations of interest, far below any uniform panel resolution.
/// `nodes` scales both the uniform background and the refinement depth;
/// the actual node count is of the order of the budget, not exactly it.
EnergyGrid resonance_refined_grid(const PacketSpec& spec,
                                  const BarrierSystem& sys,
                                  std::size_t nodes, double width_sigmas);

}  // namespace tunnellab
