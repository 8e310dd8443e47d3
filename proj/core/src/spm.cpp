#include "tunnellab/spm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tunnellab {

double phase_time_exact(double E, const BarrierSystem& sys) {
  const SpectralPrimitives p = spectral_primitives(E, sys);
  if (sys.a == 0.0) return 0.0;
  const double th = std::tanh(p.chi * sys.a);
  const double ratio_sum = p.k / p.chi + p.chi / p.k;
  const double ch = std::cosh(p.chi * sys.a);
  return (sys.m * sys.a / (2.0 * p.k)) /
         (1.0 + p.delta_minus * p.delta_minus * th * th) *
         (ratio_sum * ratio_sum * th / (p.chi * sys.a) -
          (p.k * p.k / (p.chi * p.chi) - 1.0) / (ch * ch));
}

double ors_phase_time(double E, const BarrierSystem& sys) {
  const SpectralPrimitives p = spectral_primitives(E, sys);
  return 2.0 * sys.m / (p.k * p.chi);
}

PhaseTimes phase_times_at(double E1, const BarrierSystem& sys) {
  const SpectralPrimitives p = spectral_primitives(E1, sys);
  PhaseTimes t;
  t.E1 = E1;
  t.v = p.k / sys.m;
  t.tau = phase_time_exact(E1, sys);
  t.tau_ors = 2.0 * sys.m / (p.k * p.chi);
  return t;
}

namespace {

// Vertex of the parabola through three (possibly non-uniform) samples,
// clamped to the bracketing interval.
double parabolic_vertex(double x0, double y0, double x1, double y1, double x2,
                        double y2) {
  const double d01 = (x1 - x0) * (y1 - y2);
  const double d21 = (x1 - x2) * (y1 - y0);
  const double denom = d01 - d21;
  if (denom == 0.0) return x1;
  const double vertex = x1 - 0.5 * ((x1 - x0) * d01 - (x1 - x2) * d21) / denom;
  return std::clamp(vertex, std::min(x0, x2), std::max(x0, x2));
}

}  // namespace

PeakCenter find_E1(Channel channel, int n, const BarrierSystem& sys,
                   const PacketSpec& spec, const EnergyGrid& grid,
                   CenterEstimator estimator,
                   const AuditOptions& audit_options) {
  SpectralFunction samples;
  samples.nodes = grid.nodes;
  samples.weights = grid.weights;
  samples.values.reserve(grid.size());
  for (double E : grid.nodes) {
    samples.values.push_back(series_term(channel, n, E, sys, spec).amplitude);
  }

  const AuditReport report = audit(samples, audit_options);
  if (report.verdict != Verdict::sharply_peaked) {
    throw SpmInapplicableError(
        "SPM inapplicable: amplitude of channel " +
        std::string(to_string(channel)) + ", n=" + std::to_string(n) +
        " is not sharply peaked (sign_changes=" +
        std::to_string(report.sign_changes) +
        ", extrema=" + std::to_string(report.extrema_count) +
        ", mass_concentration=" + std::to_string(report.mass_concentration) +
        ")");
  }

  std::size_t imax = 0;
  for (std::size_t i = 1; i < samples.values.size(); ++i) {
    if (samples.values[i] > samples.values[imax]) imax = i;
  }

  PeakCenter center;
  if (imax == 0 || imax + 1 == grid.size()) {
    center.argmax_E1 = grid.nodes[imax];
  } else {
    center.argmax_E1 = parabolic_vertex(
        grid.nodes[imax - 1], samples.values[imax - 1], grid.nodes[imax],
        samples.values[imax], grid.nodes[imax + 1], samples.values[imax + 1]);
  }

  double mass = 0.0, first = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = grid.weights[i] * samples.values[i];
    mass += m;
    first += m * grid.nodes[i];
  }
  center.mean_E1 = first / mass;

  center.E1 = estimator == CenterEstimator::argmax ? center.argmax_E1
                                                   : center.mean_E1;
  center.estimators_disagree =
      std::abs(center.argmax_E1 - center.mean_E1) > 0.5 * spec.delta;
  center.below_E0 = center.E1 <= spec.E0;
  return center;
}

Station station_for(Channel channel) {
  switch (channel) {
    case Channel::transmitted: return Station::exit_face;
    case Channel::reflected: return Station::entry_face;
    case Channel::cavity_right:
    case Channel::cavity_left: return Station::cavity_entry_face;
  }
  throw std::invalid_argument("station_for: unknown channel");
}

double schedule_slope(Channel channel, int n) {
  switch (channel) {
    case Channel::transmitted: return 2 * n + 1;
    case Channel::reflected:
    case Channel::cavity_right: return 2 * n;
    case Channel::cavity_left: return 2 * (n + 1);
  }
  throw std::invalid_argument("schedule_slope: unknown channel");
}

PeakSchedule peak_schedule(Channel channel, int n_max, double separation,
                           const PhaseTimes& times) {
  if (n_max < 0) throw std::invalid_argument("peak_schedule: n_max must be >= 0");
  if (separation < 0.0) {
    throw std::invalid_argument("peak_schedule: separation must be >= 0");
  }
  PeakSchedule schedule;
  schedule.channel = channel;
  schedule.station = station_for(channel);
  schedule.entries.reserve(static_cast<std::size_t>(n_max) + 1);
  const double flight = separation / times.v;
  for (int n = 0; n <= n_max; ++n) {
    double t = 0.0;
    switch (channel) {
      case Channel::transmitted:
        t = (2 * n + 1) * flight + 2 * (n + 1) * times.tau;
        break;
      case Channel::reflected:
      case Channel::cavity_right:
        t = 2 * n * flight + (2 * n + 1) * times.tau;
        break;
      case Channel::cavity_left:
        t = 2 * (n + 1) * flight + 2 * (n + 1) * times.tau;
        break;
    }
    schedule.entries.emplace_back(n, t);
  }
  return schedule;
}

OrsComparison ors_vs_rigorous_report(const BarrierSystem& sys_template,
                                     const PacketSpec& spec,
                                     std::span<const double> separations,
                                     const EnergyGrid& grid) {
  if (separations.empty()) {
    throw std::invalid_argument("ors_vs_rigorous_report: need separations");
  }
  // The transmitted term amplitudes carry no L, so E1 is the same for every
  // separation in the sweep.
  OrsComparison cmp;
  cmp.center = find_E1(Channel::transmitted, 0, sys_template, spec, grid);
  cmp.times = phase_times_at(cmp.center.E1, sys_template);
  cmp.rows.reserve(separations.size());
  for (double d : separations) {
    if (d < 0.0) {
      throw std::invalid_argument("ors_vs_rigorous_report: d must be >= 0");
    }
    OrsComparisonRow row;
    row.separation = d;
    row.rigorous_t0 = d / cmp.times.v + 2.0 * cmp.times.tau;
    row.tau_ors = cmp.times.tau_ors;
    cmp.rows.push_back(row);
  }
  cmp.rigorous_slope = 1.0 / cmp.times.v;
  double dmin = separations[0], dmax = separations[0];
  for (double d : separations) {
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  cmp.separation_dependent = dmax > dmin;  // affine with nonzero slope
  return cmp;
}

}  // namespace tunnellab
