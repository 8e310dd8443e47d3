#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "tunnellab/model.hpp"
#include "tunnellab/scattering.hpp"
#include "tunnellab/spm.hpp"

namespace tunnellab {

/// Detection or convergence failure in the brute-force pipeline.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct FieldSample {
  double x;
  double t;
  Complex psi;
  double density;  // |psi|^2
};

/// Where the field is evaluated. The slabs [0,a] and [L,L+a] themselves are
/// not modeled (the stationary solution is only assembled outside them).
enum class Region { incident_side, cavity, transmitted_side };

/// Detector configuration for a region. `reflected_part` isolates the
/// R e^{-ikx} component on the incident side, where the full field is
/// otherwise dominated by the incoming packet at the times of interest.
struct Readout {
  Region region = Region::transmitted_side;
  enum class Component { full, reflected_part } component = Component::full;
};

/// psi(x, t) = integral over the grid of g(E) {region field} e^{-iEt}.
/// incident_side accepts x <= 0, cavity a <= x <= L, transmitted_side
/// x >= L+a; anything else throws std::invalid_argument.
FieldSample synthesize(Region region, double x, double t,
                       const BarrierSystem& sys, const PacketSpec& spec,
                       const EnergyGrid& grid);

/// |psi|^2 at a fixed station over a time grid. Deterministic: the energy
/// sum inside each sample runs in fixed order, and parallelism (capped by
/// TUNNELLAB_THREADS) only ever splits independent samples.
std::vector<double> density_timeseries(double station,
                                       std::span<const double> t_grid,
                                       const Readout& readout,
                                       const BarrierSystem& sys,
                                       const PacketSpec& spec,
                                       const EnergyGrid& grid);

/// Like density_timeseries, but keeps the complex field per sample.
std::vector<FieldSample> field_timeseries(double station,
                                          std::span<const double> t_grid,
                                          const Readout& readout,
                                          const BarrierSystem& sys,
                                          const PacketSpec& spec,
                                          const EnergyGrid& grid);

/// Bounce-resolved synthesis: the density of the single (channel, n) term
/// of the multiple-reflection expansion, quadratured like any other field.
/// The full station density is the coherent sum over all n (plus nothing
/// else); these are its physically labeled constituents.
std::vector<double> term_density_timeseries(Channel channel, int n,
                                            double station,
                                            std::span<const double> t_grid,
                                            const BarrierSystem& sys,
                                            const PacketSpec& spec,
                                            const EnergyGrid& grid);

struct PeakEvent {
  double time;
  double height;
  std::optional<int> n_assigned;
};

/// Local maxima with topographic prominence >= prominence * global max,
/// refined by three-point parabolic interpolation, ascending in time.
/// A flat (or empty) series yields no events. prominence must be in (0,1).
std::vector<PeakEvent> detect_peaks(std::span<const double> series,
                                    std::span<const double> t_grid,
                                    double prominence);

/// Match events to schedule entries: nearest schedule time wins; an event
/// farther than half the local schedule gap from every entry, or nearly
/// equidistant between two entries, stays unassigned.
void assign_branches(std::vector<PeakEvent>& events,
                     const PeakSchedule& schedule);

struct GridSpec {
  std::size_t nodes = 2048;
  double width_sigmas = 8.0;
};

struct DetectionSpec {
  double prominence = 0.05;
  double t_step = 0.0;  // 0 = tau/50
  double t_max = 0.0;   // 0 = n=3 schedule time + 5 tau
};

/// The central experiment: measured first-bounce arrival at x = L+a as a
/// function of the separation d, with an affine least-squares fit.
///
/// Arrivals are measured on bounce-resolved packets (term_density_timeseries
/// for n = 0 and n = 1). At the canonical packet width the raw station
/// density cannot be used for this: the bounce sub-packets (temporal std
/// 1/(sqrt2 delta) ~ 7) overlap across gaps of 15-20 and interfere, and at
/// separations where a cavity resonance falls near E0 the station series is
/// a single quasi-bound ringdown hump with no early local maximum at all.
/// The raw series is still synthesized and its first detected peak reported
/// per d as a diagnostic, along with the merged-peak-regime flag.
struct SeparationFit {
  std::vector<double> separations;       // measured d values, ascending
  std::vector<double> first_peak_times;  // bounce n = 0 arrivals
  std::vector<double> second_peak_times; // bounce n = 1 arrivals (NaN if missed)
  std::vector<double> raw_first_peak_times;  // raw-station diagnostic (NaN if none)
  std::vector<double> failed;            // d values with no n = 0 detection
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> residuals;
  PhaseTimes times;                      // at the transmitted n = 0 E1
  PeakCenter center;
  bool merged_peak_regime = false;       // min d / v < 1/(sqrt2 delta)
};

SeparationFit arrival_vs_separation(std::span<const double> separations,
                                    const BarrierSystem& sys_template,
                                    const PacketSpec& spec,
                                    const GridSpec& grid_spec,
                                    const DetectionSpec& detection = {});

/// Reflected-channel bookkeeping: the first departure is read from the raw
/// reflected-part field at x = 0 (its n = 0 term carries ~all the reflected
/// amplitude and no separation dependence); the second departure is the
/// bounce-resolved n = 1 packet.
struct ReflectedCheck {
  std::vector<double> separations;
  std::vector<double> first_departures;   // raw, expected d-independent
  std::vector<double> second_departures;  // bounce n = 1 (NaN if missed)
  double first_spread = 0.0;              // max - min of first departures
  PhaseTimes first_times;                 // at the reflected n = 0 E1
  PhaseTimes second_times;                // at the reflected n = 1 E1
};

ReflectedCheck reflected_departures(std::span<const double> separations,
                                    const BarrierSystem& sys_template,
                                    const PacketSpec& spec,
                                    const GridSpec& grid_spec,
                                    const DetectionSpec& detection = {});

namespace detail {
/// Number of worker threads: hardware concurrency capped by the
/// TUNNELLAB_THREADS environment variable (>= 1).
int worker_threads();
}  // namespace detail

}  // namespace tunnellab
