#include "tunnellab/packets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

namespace tunnellab {

namespace detail {

int worker_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("TUNNELLAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = std::min<long>(hw, cap);
  }
  return hw;
}

// Runs fn(i) for i in [0, count). Each index writes only its own output
// slot, so results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int threads = worker_threads();
  if (threads <= 1 || count < 256) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t lo = chunk * static_cast<std::size_t>(t);
    if (lo >= count) break;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

namespace {

// Precomputed per-node integrand pieces for one station:
//   psi(t) = sum_i coeff[i] * e^{-i E_i t},
// where coeff folds together quadrature weight, g(E), channel coefficients
// and the spatial phase at the station.
struct StationTable {
  std::vector<double> energies;
  std::vector<Complex> coeff;
};

void check_region(Region region, double x, const BarrierSystem& sys) {
  bool ok = false;
  switch (region) {
    case Region::incident_side: ok = x <= 0.0; break;
    case Region::cavity: ok = x >= sys.a && x <= sys.L; break;
    case Region::transmitted_side: ok = x >= sys.L + sys.a; break;
  }
  if (!ok) {
    throw std::invalid_argument(
        "field not modeled at x=" + std::to_string(x) +
        " for the requested region (no coefficients inside barrier slabs)");
  }
}

StationTable station_table(const Readout& readout, double x,
                           const BarrierSystem& sys, const PacketSpec& spec,
                           const EnergyGrid& grid) {
  check_region(readout.region, x, sys);
  StationTable table;
  table.energies = grid.nodes;
  table.coeff.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double E = grid.nodes[i];
    const SpectralPrimitives p = spectral_primitives(E, sys);
    const StationaryCoefficients c = stationary_coefficients(E, sys);
    const double gw = grid.weights[i] * gaussian_weight(E, spec);
    Complex field = 0.0;
    switch (readout.region) {
      case Region::incident_side: {
        const Complex incident = std::polar(1.0, p.k * x);
        const Complex reflected = c.R * std::polar(1.0, -p.k * x);
        field = readout.component == Readout::Component::reflected_part
                    ? reflected
                    : incident + reflected;
        break;
      }
      case Region::cavity:
        field = c.alpha * std::polar(1.0, p.k * (x - sys.a)) +
                c.beta * std::polar(1.0, -p.k * (x - sys.a));
        break;
      case Region::transmitted_side:
        field = c.T * std::polar(1.0, p.k * x);
        break;
    }
    table.coeff[i] = gw * field;
  }
  return table;
}

StationTable term_station_table(Channel channel, int n, double x,
                                const BarrierSystem& sys,
                                const PacketSpec& spec,
                                const EnergyGrid& grid) {
  switch (channel) {
    case Channel::transmitted: check_region(Region::transmitted_side, x, sys); break;
    case Channel::reflected: check_region(Region::incident_side, x, sys); break;
    case Channel::cavity_right:
    case Channel::cavity_left: check_region(Region::cavity, x, sys); break;
  }
  StationTable table;
  table.energies = grid.nodes;
  table.coeff.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double E = grid.nodes[i];
    const SpectralPrimitives p = spectral_primitives(E, sys);
    const SeriesTerm term = series_term(channel, n, E, sys, spec);
    const double gw = grid.weights[i] * gaussian_weight(E, spec);
    Complex field = 0.0;
    switch (channel) {
      case Channel::transmitted:
        // Restore the free-flight prefactor the series factors out.
        field = term.value * std::polar(1.0, p.k * (x - sys.L - sys.a));
        break;
      case Channel::reflected:
        field = term.value * std::polar(1.0, -p.k * x);
        break;
      case Channel::cavity_right:
        field = term.value * std::polar(1.0, p.k * (x - sys.a));
        break;
      case Channel::cavity_left:
        field = term.value * std::polar(1.0, -p.k * (x - sys.a));
        break;
    }
    table.coeff[i] = gw * field;
  }
  return table;
}

Complex evaluate(const StationTable& table, double t) {
  Complex acc = 0.0;
  const std::size_t n = table.energies.size();
  for (std::size_t i = 0; i < n; ++i) {
    acc += table.coeff[i] * std::polar(1.0, -table.energies[i] * t);
  }
  return acc;
}

std::vector<double> densities(const StationTable& table,
                              std::span<const double> t_grid) {
  std::vector<double> out(t_grid.size());
  detail::parallel_for(t_grid.size(), [&](std::size_t j) {
    out[j] = std::norm(evaluate(table, t_grid[j]));
  });
  return out;
}

}  // namespace

FieldSample synthesize(Region region, double x, double t,
                       const BarrierSystem& sys, const PacketSpec& spec,
                       const EnergyGrid& grid) {
  const StationTable table = station_table({region}, x, sys, spec, grid);
  FieldSample sample;
  sample.x = x;
  sample.t = t;
  sample.psi = evaluate(table, t);
  sample.density = std::norm(sample.psi);
  return sample;
}

std::vector<double> density_timeseries(double station,
                                       std::span<const double> t_grid,
                                       const Readout& readout,
                                       const BarrierSystem& sys,
                                       const PacketSpec& spec,
                                       const EnergyGrid& grid) {
  if (t_grid.empty()) return {};
  const StationTable table = station_table(readout, station, sys, spec, grid);
  return densities(table, t_grid);
}

std::vector<FieldSample> field_timeseries(double station,
                                          std::span<const double> t_grid,
                                          const Readout& readout,
                                          const BarrierSystem& sys,
                                          const PacketSpec& spec,
                                          const EnergyGrid& grid) {
  std::vector<FieldSample> out(t_grid.size());
  if (t_grid.empty()) return out;
  const StationTable table = station_table(readout, station, sys, spec, grid);
  detail::parallel_for(t_grid.size(), [&](std::size_t j) {
    FieldSample& sample = out[j];
    sample.x = station;
    sample.t = t_grid[j];
    sample.psi = evaluate(table, t_grid[j]);
    sample.density = std::norm(sample.psi);
  });
  return out;
}

std::vector<double> term_density_timeseries(Channel channel, int n,
                                            double station,
                                            std::span<const double> t_grid,
                                            const BarrierSystem& sys,
                                            const PacketSpec& spec,
                                            const EnergyGrid& grid) {
  if (t_grid.empty()) return {};
  const StationTable table =
      term_station_table(channel, n, station, sys, spec, grid);
  return densities(table, t_grid);
}

std::vector<PeakEvent> detect_peaks(std::span<const double> series,
                                    std::span<const double> t_grid,
                                    double prominence) {
  if (!(prominence > 0.0 && prominence < 1.0)) {
    throw std::invalid_argument("detect_peaks: prominence must be in (0, 1)");
  }
  if (series.size() != t_grid.size()) {
    throw std::invalid_argument("detect_peaks: series/t_grid size mismatch");
  }
  std::vector<PeakEvent> events;
  if (series.size() < 3) return events;

  double global_max = series[0];
  for (double v : series) global_max = std::max(global_max, v);
  if (!(global_max > 0.0)) return events;

  const std::size_t n = series.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(series[i] > series[i - 1] && series[i] >= series[i + 1])) continue;

    // Topographic prominence: lowest point on the walk to the nearest
    // higher sample (or the end of the record) on each side; the higher of
    // the two valley floors is the reference level.
    double left_min = series[i];
    for (std::size_t j = i; j-- > 0;) {
      if (series[j] > series[i]) break;
      left_min = std::min(left_min, series[j]);
    }
    double right_min = series[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (series[j] > series[i]) break;
      right_min = std::min(right_min, series[j]);
    }
    const double prom = series[i] - std::max(left_min, right_min);
    if (prom < prominence * global_max) continue;

    const double y0 = series[i - 1], y1 = series[i], y2 = series[i + 1];
    const double curvature = y0 - 2.0 * y1 + y2;
    double offset = 0.0;
    if (curvature != 0.0) {
      offset = std::clamp(0.5 * (y0 - y2) / curvature, -1.0, 1.0);
    }
    const double dt_left = t_grid[i] - t_grid[i - 1];
    const double dt_right = t_grid[i + 1] - t_grid[i];
    const double step = offset < 0.0 ? dt_left : dt_right;
    PeakEvent event;
    event.time = t_grid[i] + offset * step;
    event.height = y1 - 0.25 * (y0 - y2) * offset;
    events.push_back(event);
  }
  return events;
}

void assign_branches(std::vector<PeakEvent>& events,
                     const PeakSchedule& schedule) {
  if (schedule.entries.empty()) return;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < schedule.entries.size(); ++i) {
    min_gap = std::min(min_gap, schedule.entries[i].second -
                                    schedule.entries[i - 1].second);
  }
  for (PeakEvent& event : events) {
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    int best_n = -1;
    for (const auto& [n, t] : schedule.entries) {
      const double dist = std::abs(event.time - t);
      if (dist < best) {
        second = best;
        best = dist;
        best_n = n;
      } else {
        second = std::min(second, dist);
      }
    }
    const double half_gap = 0.5 * min_gap;
    if (best <= half_gap && second > half_gap) {
      event.n_assigned = best_n;
    } else {
      event.n_assigned.reset();
    }
  }
}

namespace {

std::vector<double> uniform_times(double lo, double hi, double step) {
  std::vector<double> t;
  if (!(step > 0.0) || !(hi > lo)) return t;
  const std::size_t count = static_cast<std::size_t>((hi - lo) / step) + 1;
  t.reserve(count);
  for (std::size_t i = 0; i < count; ++i) t.push_back(lo + step * i);
  return t;
}

// First detected peak of a single bounce packet around its predicted time.
// Term packets are single bumps, so the window only has to cover the
// envelope: +-(3 sigma_t + 2 tau) around the prediction.
std::optional<PeakEvent> measure_term_peak(Channel channel, int n,
                                           double station, double predicted,
                                           double tau, double delta,
                                           double t_step, double prominence,
                                           const BarrierSystem& sys,
                                           const PacketSpec& spec,
                                           const EnergyGrid& grid) {
  const double half_window = 3.0 / (std::sqrt(2.0) * delta) + 2.0 * tau;
  const std::vector<double> t_grid = uniform_times(
      predicted - half_window, predicted + half_window, t_step);
  const std::vector<double> series =
      term_density_timeseries(channel, n, station, t_grid, sys, spec, grid);
  std::vector<PeakEvent> events = detect_peaks(series, t_grid, prominence);
  if (events.empty()) return std::nullopt;
  // The dominant bump, not a window-edge ripple.
  std::size_t best = 0;
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].height > events[best].height) best = i;
  }
  return events[best];
}

struct AffineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> residuals;
};

AffineFit least_squares(const std::vector<double>& x,
                        const std::vector<double>& y) {
  AffineFit fit;
  const std::size_t n = x.size();
  if (n < 2) return fit;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += fit.residuals[i] * fit.residuals[i];
  }
  if (n > 2) fit.slope_stderr = std::sqrt(ss / (n - 2) / sxx);
  return fit;
}

}  // namespace

SeparationFit arrival_vs_separation(std::span<const double> separations,
                                    const BarrierSystem& sys_template,
                                    const PacketSpec& spec,
                                    const GridSpec& grid_spec,
                                    const DetectionSpec& detection) {
  std::vector<double> ds(separations.begin(), separations.end());
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  if (ds.size() < 3) {
    throw std::invalid_argument(
        "arrival_vs_separation: need at least 3 distinct separations");
  }

  SeparationFit result;

  // E1 carries no separation dependence; one grid serves the whole sweep.
  BarrierSystem sys0 = sys_template;
  sys0.L = sys0.a + ds.front();
  const EnergyGrid e1_grid = resonance_refined_grid(
      spec, sys0, grid_spec.nodes, grid_spec.width_sigmas);
  result.center = find_E1(Channel::transmitted, 0, sys0, spec, e1_grid);
  result.times = phase_times_at(result.center.E1, sys0);
  const PhaseTimes times1 = phase_times_at(
      find_E1(Channel::transmitted, 1, sys0, spec, e1_grid).E1, sys0);

  const double t_step =
      detection.t_step > 0.0 ? detection.t_step : result.times.tau / 50.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> fit_d, fit_t;
  for (double d : ds) {
    BarrierSystem sys = sys_template;
    sys.L = sys.a + d;
    const EnergyGrid grid = resonance_refined_grid(
        spec, sys, grid_spec.nodes, grid_spec.width_sigmas);
    const double station = sys.L + sys.a;

    const double pred0 = d / result.times.v + 2.0 * result.times.tau;
    const auto peak0 = measure_term_peak(
        Channel::transmitted, 0, station, pred0, result.times.tau, spec.delta,
        t_step, detection.prominence, sys, spec, grid);
    if (!peak0) {
      result.failed.push_back(d);
      continue;
    }

    const double pred1 = 3.0 * d / times1.v + 4.0 * times1.tau;
    const auto peak1 = measure_term_peak(
        Channel::transmitted, 1, station, pred1, times1.tau, spec.delta,
        t_step, detection.prominence, sys, spec, grid);

    // Raw-station diagnostic: first detected peak of the full transmitted
    // density, whatever it is.
    const double t_max = detection.t_max > 0.0
                             ? detection.t_max
                             : 7.0 * d / result.times.v +
                                   8.0 * result.times.tau +
                                   5.0 * result.times.tau;
    const std::vector<double> t_grid = uniform_times(0.0, t_max, t_step);
    const std::vector<double> raw = density_timeseries(
        station, t_grid, {Region::transmitted_side}, sys, spec, grid);
    const std::vector<PeakEvent> raw_events =
        detect_peaks(raw, t_grid, detection.prominence);

    result.separations.push_back(d);
    result.first_peak_times.push_back(peak0->time);
    result.second_peak_times.push_back(peak1 ? peak1->time : nan);
    result.raw_first_peak_times.push_back(
        raw_events.empty() ? nan : raw_events.front().time);
    fit_d.push_back(d);
    fit_t.push_back(peak0->time);
  }

  const AffineFit fit = least_squares(fit_d, fit_t);
  result.slope = fit.slope;
  result.intercept = fit.intercept;
  result.slope_stderr = fit.slope_stderr;
  result.residuals = fit.residuals;
  result.merged_peak_regime =
      !ds.empty() &&
      ds.front() / result.times.v < 1.0 / (std::sqrt(2.0) * spec.delta);
  return result;
}

ReflectedCheck reflected_departures(std::span<const double> separations,
                                    const BarrierSystem& sys_template,
                                    const PacketSpec& spec,
                                    const GridSpec& grid_spec,
                                    const DetectionSpec& detection) {
  if (separations.empty()) {
    throw std::invalid_argument("reflected_departures: need separations");
  }
  ReflectedCheck result;

  BarrierSystem sys0 = sys_template;
  sys0.L = sys0.a + separations.front();
  const EnergyGrid e1_grid = resonance_refined_grid(
      spec, sys0, grid_spec.nodes, grid_spec.width_sigmas);
  result.first_times = phase_times_at(
      find_E1(Channel::reflected, 0, sys0, spec, e1_grid).E1, sys0);
  result.second_times = phase_times_at(
      find_E1(Channel::reflected, 1, sys0, spec, e1_grid).E1, sys0);

  const double t_step = detection.t_step > 0.0 ? detection.t_step
                                               : result.first_times.tau / 50.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double half_window =
      3.0 / (std::sqrt(2.0) * spec.delta) + 2.0 * result.first_times.tau;

  for (double d : separations) {
    BarrierSystem sys = sys_template;
    sys.L = sys.a + d;
    const EnergyGrid grid = resonance_refined_grid(
        spec, sys, grid_spec.nodes, grid_spec.width_sigmas);

    // First departure: raw reflected field at the barrier face. The n = 0
    // face bounce dominates the reflected amplitude by ~1/|T0|^2, so no
    // bounce isolation is needed here.
    const double pred_first = result.first_times.tau;
    const std::vector<double> t_grid = uniform_times(
        pred_first - half_window, pred_first + half_window, t_step);
    const std::vector<double> series = density_timeseries(
        0.0, t_grid,
        {Region::incident_side, Readout::Component::reflected_part}, sys, spec,
        grid);
    std::vector<PeakEvent> events =
        detect_peaks(series, t_grid, detection.prominence);
    double first = nan;
    if (!events.empty()) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].height > events[best].height) best = i;
      }
      first = events[best].time;
    }

    const double pred_second =
        2.0 * d / result.second_times.v + 3.0 * result.second_times.tau;
    const auto peak1 = measure_term_peak(
        Channel::reflected, 1, 0.0, pred_second, result.second_times.tau,
        spec.delta, t_step, detection.prominence, sys, spec, grid);

    result.separations.push_back(d);
    result.first_departures.push_back(first);
    result.second_departures.push_back(peak1 ? peak1->time : nan);
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double t : result.first_departures) {
    if (std::isnan(t)) continue;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  result.first_spread = hi >= lo ? hi - lo : nan;
  return result;
}

}  // namespace tunnellab
