#include "tunnellab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tunnellab {

void BarrierSystem::validate() const {
  if (!(m > 0.0)) throw std::invalid_argument("BarrierSystem: m must be > 0");
  if (!(V0 > 0.0)) throw std::invalid_argument("BarrierSystem: V0 must be > 0");
  if (!(a >= 0.0)) throw std::invalid_argument("BarrierSystem: a must be >= 0");
  if (!(L >= a)) throw std::invalid_argument("BarrierSystem: L must be >= a");
}

void PacketSpec::validate(const BarrierSystem& sys) const {
  sys.validate();
  if (!(delta > 0.0)) {
    throw std::invalid_argument("PacketSpec: delta must be > 0");
  }
  if (!(E0 > 0.0 && E0 < sys.V0)) {
    throw std::invalid_argument("PacketSpec: E0 must lie in (0, V0)");
  }
  if (E0 - delta <= 0.0 || E0 + delta >= sys.V0) {
    throw std::invalid_argument(
        "PacketSpec: delta too wide, [E0 - delta, E0 + delta] must stay "
        "inside (0, V0)");
  }
}

bool PacketSpec::tails_clipped(const BarrierSystem& sys) const {
  return E0 - 3.0 * delta <= 0.0 || E0 + 3.0 * delta >= sys.V0;
}

SpectralPrimitives spectral_primitives(double E, const BarrierSystem& sys) {
  sys.validate();
  if (!(E > 0.0 && E < sys.V0)) {
    throw std::domain_error("spectral_primitives: tunneling regime only, "
                            "require 0 < E < V0");
  }
  SpectralPrimitives p;
  p.E = E;
  p.k = std::sqrt(2.0 * sys.m * E);
  p.chi = std::sqrt(2.0 * sys.m * (sys.V0 - E));
  p.delta_plus = 0.5 * (p.chi / p.k + p.k / p.chi);
  p.delta_minus = 0.5 * (p.chi / p.k - p.k / p.chi);
  const double sh = std::sinh(p.chi * sys.a);
  p.r = std::sqrt(1.0 + p.delta_plus * p.delta_plus * sh * sh);
  p.phi = -std::atan(p.delta_minus * std::tanh(p.chi * sys.a));
  return p;
}

double gaussian_weight(double E, const PacketSpec& spec) {
  if (!(spec.delta > 0.0)) {
    throw std::invalid_argument("gaussian_weight: delta must be > 0");
  }
  const double z = (E - spec.E0) / spec.delta;
  return std::exp(-0.5 * z * z) /
         (std::sqrt(2.0 * std::numbers::pi) * spec.delta);
}

EnergyGrid build_energy_grid(const PacketSpec& spec, const BarrierSystem& sys,
                             std::size_t nodes, double width_sigmas) {
  spec.validate(sys);
  if (nodes < 16) {
    throw std::invalid_argument("build_energy_grid: need at least 16 nodes");
  }
  if (!(width_sigmas > 0.0)) {
    throw std::invalid_argument("build_energy_grid: width must be > 0");
  }
  const double eps = kGridGuardFraction * sys.V0;
  const double lo = std::max(eps, spec.E0 - width_sigmas * spec.delta);
  const double hi = std::min(sys.V0 - eps, spec.E0 + width_sigmas * spec.delta);
  if (!(lo < hi)) {
    throw std::invalid_argument(
        "build_energy_grid: empty energy window after clipping to (0, V0)");
  }

  const int per_panel = nodes >= 64 ? 32 : static_cast<int>(nodes);
  const std::size_t panels =
      std::max<std::size_t>(1, nodes / static_cast<std::size_t>(per_panel));

  EnergyGrid grid;
  grid.nodes.reserve(panels * static_cast<std::size_t>(per_panel));
  grid.weights.reserve(panels * static_cast<std::size_t>(per_panel));
  for (std::size_t i = 0; i < panels; ++i) {
    const double p_lo = lo + (hi - lo) * static_cast<double>(i) / panels;
    const double p_hi = lo + (hi - lo) * static_cast<double>(i + 1) / panels;
    append_gauss_panel(per_panel, p_lo, p_hi, grid.nodes, grid.weights);
  }
  return grid;
}

}  // namespace tunnellab
