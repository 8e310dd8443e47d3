#include "tunnellab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace tunnellab {

namespace {

using namespace std::complex_literals;

constexpr double kPoleTolerance = 1e-9;  // relative, ors_asymptotic flag

struct Workspace {
  SpectralPrimitives p;
  double d;         // L - a
  double sh;        // sinh(chi a)
  Complex cc;       // cosh(chi a) + i Delta- sinh(chi a) = r e^{-i phi}
  double s;         // Delta+ sinh(chi a)
  double rho;       // s / r = |R0|
  Complex D;        // cc^2 e^{-ikd} + s^2 e^{+ikd}
};

Workspace workspace(double E, const BarrierSystem& sys) {
  Workspace w;
  w.p = spectral_primitives(E, sys);
  w.d = sys.separation();
  w.sh = std::sinh(w.p.chi * sys.a);
  w.cc = Complex(std::cosh(w.p.chi * sys.a), w.p.delta_minus * w.sh);
  w.s = w.p.delta_plus * w.sh;
  w.rho = w.s / w.p.r;
  const Complex ekd = std::polar(1.0, w.p.k * w.d);
  w.D = w.cc * w.cc / ekd + (w.s * w.s) * ekd;
  return w;
}

double ors_denominator(const SpectralPrimitives& p, double d) {
  return 2.0 * p.k * p.chi * std::cos(p.k * d) +
         (p.chi * p.chi - p.k * p.k) * std::sin(p.k * d);
}

}  // namespace

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::transmitted: return "transmitted";
    case Channel::reflected: return "reflected";
    case Channel::cavity_right: return "cavity_right";
    case Channel::cavity_left: return "cavity_left";
  }
  return "?";
}

Channel parse_channel(std::string_view name) {
  if (name == "transmitted") return Channel::transmitted;
  if (name == "reflected") return Channel::reflected;
  if (name == "cavity_right") return Channel::cavity_right;
  if (name == "cavity_left") return Channel::cavity_left;
  throw std::invalid_argument("unknown channel '" + std::string(name) +
                              "' (transmitted, reflected, cavity_right, "
                              "cavity_left)");
}

StationaryCoefficients stationary_coefficients(double E,
                                               const BarrierSystem& sys) {
  const Workspace w = workspace(E, sys);
  const Complex ekd = std::polar(1.0, w.p.k * w.d);
  StationaryCoefficients c;
  c.T = std::polar(1.0, -w.p.k * (sys.L + sys.a)) / w.D;
  c.R = -1.0i * w.s * (std::conj(w.cc) * ekd + w.cc / ekd) / w.D;
  c.alpha = w.cc / ekd / w.D;
  c.beta = -1.0i * w.s * ekd / w.D;
  return c;
}

SingleBarrierCoefficients single_barrier(double E, const BarrierSystem& sys) {
  const Workspace w = workspace(E, sys);
  SingleBarrierCoefficients c;
  c.T0 = 1.0 / w.cc;
  c.R0 = -1.0i * w.s / w.cc;
  return c;
}

OrsAsymptotic ors_asymptotic(double E, const BarrierSystem& sys) {
  const SpectralPrimitives p = spectral_primitives(E, sys);
  const double d = sys.separation();
  const double den = ors_denominator(p, d);
  const double scale =
      2.0 * p.k * p.chi + std::abs(p.chi * p.chi - p.k * p.k);

  OrsAsymptotic out;
  out.pole = std::abs(den) < kPoleTolerance * scale;
  out.A = 2.0 * p.k * p.chi / den;
  const Complex ik_minus_chi(-p.chi, p.k);
  out.T_asym = std::exp(-2.0 * p.chi * sys.a) * out.A *
               (-4.0i * p.k * p.chi) / (ik_minus_chi * ik_minus_chi) *
               std::polar(1.0, -p.k * (sys.L + sys.a));
  return out;
}

double critique_amplitude(double E, const BarrierSystem& sys,
                          const PacketSpec& spec) {
  const SpectralPrimitives p = spectral_primitives(E, sys);
  const double den = ors_denominator(p, sys.separation());
  const double A = 2.0 * p.k * p.chi / den;  // IEEE inf at an exact pole
  return gaussian_weight(E, spec) * std::exp(-2.0 * p.chi * sys.a) * A *
         4.0 * p.k * p.chi / (p.k * p.k + p.chi * p.chi);
}

namespace {

Complex term_value(const Workspace& w, Channel channel, int n) {
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  const double kd = w.p.k * w.d;
  const double phi = w.p.phi;
  const double r = w.p.r;
  switch (channel) {
    case Channel::transmitted:
      return sign / (r * r) * std::pow(w.rho, 2 * n) *
             std::polar(1.0, (2 * n + 1) * kd + 2 * (n + 1) * phi);
    case Channel::reflected:
      if (n == 0) {
        // Face bounce off the first barrier; no 1/r^2 prefactor and no
        // separation dependence.
        return -1.0i * w.rho * std::polar(1.0, phi);
      }
      return 1.0i * sign / (r * r) * std::pow(w.rho, 2 * n - 1) *
             std::polar(1.0, 2 * n * kd + (2 * n + 1) * phi);
    case Channel::cavity_right:
      return sign / r * std::pow(w.rho, 2 * n) *
             std::polar(1.0, 2 * n * kd + (2 * n + 1) * phi);
    case Channel::cavity_left:
      return -1.0i * sign / r * std::pow(w.rho, 2 * n + 1) *
             std::polar(1.0, 2 * (n + 1) * kd + 2 * (n + 1) * phi);
  }
  throw std::invalid_argument("series_term: unknown channel");
}

}  // namespace

SeriesTerm series_term(Channel channel, int n, double E,
                       const BarrierSystem& sys, const PacketSpec& spec) {
  if (n < 0) throw std::invalid_argument("series_term: n must be >= 0");
  const Workspace w = workspace(E, sys);
  SeriesTerm term;
  term.channel = channel;
  term.n = n;
  term.value = term_value(w, channel, n);
  term.amplitude = gaussian_weight(E, spec) * std::abs(term.value);
  return term;
}

Complex series_partial_sum(Channel channel, int n_terms, double E,
                           const BarrierSystem& sys) {
  if (n_terms < 0) {
    throw std::invalid_argument("series_partial_sum: N must be >= 0");
  }
  const Workspace w = workspace(E, sys);
  Complex acc = 0.0;
  for (int n = 0; n <= n_terms; ++n) {
    acc += term_value(w, channel, n);
  }
  return acc;
}

Complex series_closed_form(Channel channel, double E,
                           const BarrierSystem& sys) {
  const StationaryCoefficients c = stationary_coefficients(E, sys);
  switch (channel) {
    case Channel::transmitted:
      // The transmitted series resums T without the overall free-flight
      // phase e^{-ik(L+a)}.
      return c.T * std::polar(1.0, spectral_primitives(E, sys).k *
                                       (sys.L + sys.a));
    case Channel::reflected: return c.R;
    case Channel::cavity_right: return c.alpha;
    case Channel::cavity_left: return c.beta;
  }
  throw std::invalid_argument("series_closed_form: unknown channel");
}

std::vector<double> resonance_energies(const BarrierSystem& sys) {
  sys.validate();
  const double d = sys.separation();
  std::vector<double> roots;
  if (d <= 0.0) return roots;

  const double eps = kGridGuardFraction * sys.V0;
  const double lo = eps;
  const double hi = sys.V0 - eps;
  constexpr int kScanIntervals = 10000;

  auto den = [&](double E) {
    return ors_denominator(spectral_primitives(E, sys), d);
  };

  double e_prev = lo;
  double f_prev = den(e_prev);
  for (int i = 1; i <= kScanIntervals; ++i) {
    const double e_next = lo + (hi - lo) * static_cast<double>(i) / kScanIntervals;
    const double f_next = den(e_next);
    if (f_prev == 0.0) {
      roots.push_back(e_prev);
    } else if (f_prev * f_next < 0.0) {
      double a_lo = e_prev, a_hi = e_next, f_lo = f_prev;
      while (a_hi - a_lo > 1e-12 * sys.V0) {
        const double mid = 0.5 * (a_lo + a_hi);
        const double f_mid = den(mid);
        if (f_lo * f_mid <= 0.0) {
          a_hi = mid;
        } else {
          a_lo = mid;
          f_lo = f_mid;
        }
      }
      roots.push_back(0.5 * (a_lo + a_hi));
    }
    e_prev = e_next;
    f_prev = f_next;
  }
  return roots;
}

double resonance_width(double E_res, const BarrierSystem& sys) {
  const SpectralPrimitives p = spectral_primitives(E_res, sys);
  const SingleBarrierCoefficients sb = single_barrier(E_res, sys);
  const double v = p.k / sys.m;
  const double roundtrip =
      2.0 * sys.separation() / v + 2.0 * (2.0 * sys.m) / (p.k * p.chi);
  return 2.0 * std::norm(sb.T0) / roundtrip;
}

EnergyGrid resonance_refined_grid(const PacketSpec& spec,
                                  const BarrierSystem& sys,
                                  std::size_t nodes, double width_sigmas) {
  spec.validate(sys);
  if (nodes < 16) {
    throw std::invalid_argument("resonance_refined_grid: need >= 16 nodes");
  }
  const double eps = kGridGuardFraction * sys.V0;
  const double lo = std::max(eps, spec.E0 - width_sigmas * spec.delta);
  const double hi = std::min(sys.V0 - eps, spec.E0 + width_sigmas * spec.delta);
  if (!(lo < hi)) {
    throw std::invalid_argument(
        "resonance_refined_grid: empty energy window after clipping");
  }

  const std::size_t base_panels = std::clamp<std::size_t>(nodes / 128, 4, 64);
  const double base_width = (hi - lo) / static_cast<double>(base_panels);

  std::set<double> edges;
  for (std::size_t i = 0; i <= base_panels; ++i) {
    edges.insert(lo + (hi - lo) * static_cast<double>(i) / base_panels);
  }

  // Geometric ladder around each pole: panel widths start near Gamma/2 and
  // double until they blend into the uniform background. Scaling the start
  // width with the node budget makes grid halving/doubling a genuine
  // refinement everywhere.
  const double depth_scale = 1024.0 / static_cast<double>(nodes);
  for (double e_res : resonance_energies(sys)) {
    if (e_res <= lo || e_res >= hi) continue;
    double w = resonance_width(e_res, sys) * depth_scale;
    double offset = 0.0;
    edges.insert(e_res);
    while (offset < base_width) {
      offset += w;
      w *= 2.0;
      if (e_res - offset > lo) edges.insert(e_res - offset);
      if (e_res + offset < hi) edges.insert(e_res + offset);
    }
  }

  EnergyGrid grid;
  grid.nodes.reserve(nodes + 512);
  grid.weights.reserve(nodes + 512);
  double prev = *edges.begin();
  for (auto it = std::next(edges.begin()); it != edges.end(); ++it) {
    const double width = *it - prev;
    if (width < 1e-13 * sys.V0) continue;  // merge degenerate edges
    const int order = width >= 0.9 * base_width ? 32 : 8;
    append_gauss_panel(order, prev, *it, grid.nodes, grid.weights);
    prev = *it;
  }
  return grid;
}

}  // namespace tunnellab
