#pragma once

#include <cstddef>
#include <vector>

#include "tunnellab/quadrature.hpp"

namespace tunnellab {

// Natural units with hbar = 1 throughout, so k = sqrt(2mE) and
// chi = sqrt(2m(V0-E)). The canonical dimensionless scaling 2m = V0 = 1
// turns the reference setup into a = 5, L = 13 (d = 8), E0 = 0.5,
// delta = 0.1.

/// Two identical rectangular barriers of height V0: one on [0, a], one on
/// [L, L+a]. The free cavity between them has length d = L - a.
struct BarrierSystem {
  double m = 0.5;
  double V0 = 1.0;
  double a = 5.0;
  double L = 13.0;

  double separation() const { return L - a; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Gaussian energy distribution g(E) with mean E0 and standard deviation
/// delta. The incident packet is assembled as integral of
/// g(E) e^{i(kx - Et)} over the tunneling window.
struct PacketSpec {
  double E0 = 0.5;
  double delta = 0.1;

  /// Hard errors: E0 in (0, V0), delta > 0, and [E0 - delta, E0 + delta]
  /// inside (0, V0). Throws std::invalid_argument naming the field.
  void validate(const BarrierSystem& sys) const;

  /// True when [E0 - 3 delta, E0 + 3 delta] sticks out of (0, V0).
  /// Callers surface this as a warning, not an error.
  bool tails_clipped(const BarrierSystem& sys) const;
};

/// Per-energy spectral quantities:
///   k = sqrt(2mE), chi = sqrt(2m(V0-E)),
///   Delta+- = (chi/k +- k/chi)/2,
///   cosh(chi a) + i Delta- sinh(chi a) = r e^{-i phi},
///   r = sqrt(1 + Delta+^2 sinh^2(chi a)),
///   phi = -atan(Delta- tanh(chi a))  (principal branch).
struct SpectralPrimitives {
  double E;
  double k;
  double chi;
  double delta_plus;
  double delta_minus;
  double r;
  double phi;
};

/// Valid only in the tunneling regime 0 < E < V0; throws std::domain_error
/// otherwise.
SpectralPrimitives spectral_primitives(double E, const BarrierSystem& sys);

/// g(E) = exp(-(E-E0)^2 / 2 delta^2) / (sqrt(2 pi) delta).
double gaussian_weight(double E, const PacketSpec& spec);

/// Sampled quadrature grid over the tunneling window. Nodes are strictly
/// increasing and stay inside (eps, V0 - eps) with eps = 1e-9 V0; both
/// k -> 0 and chi -> 0 make the Delta+- combinations singular at the
/// endpoints.
struct EnergyGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr double kGridGuardFraction = 1e-9;

/// Composite Gauss-Legendre panels covering
/// [max(eps, E0 - width delta), min(V0 - eps, E0 + width delta)].
/// `nodes` is the total node budget (>= 16). Throws std::invalid_argument
/// when the clipped interval is empty.
EnergyGrid build_energy_grid(const PacketSpec& spec, const BarrierSystem& sys,
                             std::size_t nodes, double width_sigmas);

}  // namespace tunnellab
