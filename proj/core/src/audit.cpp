#include "tunnellab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tunnellab/quadrature.hpp"

namespace tunnellab {

AuditReport audit(const SpectralFunction& samples,
                  const AuditOptions& options) {
  const std::size_t n = samples.values.size();
  if (n < 64) {
    throw std::invalid_argument("audit: need at least 64 samples");
  }
  if (samples.nodes.size() != n || samples.weights.size() != n) {
    throw std::invalid_argument("audit: nodes/weights/values size mismatch");
  }

  bool any_nonzero = false;
  bool all_finite = true;
  for (double v : samples.values) {
    if (v != 0.0) any_nonzero = true;
    if (!std::isfinite(v)) all_finite = false;
  }
  if (!any_nonzero) {
    throw std::invalid_argument("audit: degenerate function, all samples zero");
  }

  AuditReport report;

  // Sign changes, zeros skipped.
  double prev_sign = 0.0;
  for (double v : samples.values) {
    if (v == 0.0 || !std::isfinite(v)) continue;
    const double s = v > 0.0 ? 1.0 : -1.0;
    if (prev_sign != 0.0 && s != prev_sign) ++report.sign_changes;
    prev_sign = s;
  }

  double global_max = 0.0;
  std::size_t peak_index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double av = std::abs(samples.values[i]);
    if (av > global_max) {
      global_max = av;
      peak_index = i;
    }
  }
  report.peak_energy = samples.nodes[peak_index];

  const double floor = options.extremum_floor * global_max;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double av = std::abs(samples.values[i]);
    if (av > std::abs(samples.values[i - 1]) &&
        av >= std::abs(samples.values[i + 1]) && av >= floor) {
      ++report.extrema_count;
    }
  }

  // |f|-weighted moments over the finite samples.
  double mass = 0.0, first = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(samples.values[i])) continue;
    const double m = samples.weights[i] * std::abs(samples.values[i]);
    mass += m;
    first += m * samples.nodes[i];
  }
  if (mass > 0.0) {
    const double mean = first / mass;
    double second = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(samples.values[i])) continue;
      const double dev = samples.nodes[i] - mean;
      second += samples.weights[i] * std::abs(samples.values[i]) * dev * dev;
    }
    const double sigma = std::sqrt(second / mass);
    double inside = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(samples.values[i])) continue;
      if (std::abs(samples.nodes[i] - report.peak_energy) <= 3.0 * sigma) {
        inside += samples.weights[i] * std::abs(samples.values[i]);
      }
    }
    report.mass_concentration = inside / mass;
  }

  const bool sharp = all_finite && report.sign_changes == 0 &&
                     report.extrema_count == 1 &&
                     report.mass_concentration >= options.mass_threshold;
  report.verdict = sharp ? Verdict::sharply_peaked : Verdict::not_sharply_peaked;
  return report;
}

double counterexample_G(double E, double tau) {
  return std::exp(-E * E) * std::cos(tau * E);
}

CounterexampleValue counterexample_I(double t, double tau) {
  CounterexampleValue out;
  const double sp = std::sqrt(std::numbers::pi);
  out.closed_form = 0.5 * sp * (std::exp(-0.25 * (t + tau) * (t + tau)) +
                                std::exp(-0.25 * (t - tau) * (t - tau)));

  // G is even, so I(t) reduces to the real cosine transform. The envelope
  // beyond |E| = 8 contributes ~e^{-64}.
  constexpr int kPanels = 8;
  constexpr int kOrder = 32;
  std::vector<double> nodes, weights;
  nodes.reserve(kPanels * kOrder);
  weights.reserve(kPanels * kOrder);
  for (int i = 0; i < kPanels; ++i) {
    const double lo = -8.0 + 16.0 * i / kPanels;
    const double hi = -8.0 + 16.0 * (i + 1) / kPanels;
    append_gauss_panel(kOrder, lo, hi, nodes, weights);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    acc += weights[i] * counterexample_G(nodes[i], tau) * std::cos(t * nodes[i]);
  }
  out.quadrature = acc;
  return out;
}

double naive_spm_prediction() { return 0.0; }

}  // namespace tunnellab
