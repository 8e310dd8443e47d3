#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tunnellab/audit.hpp"
#include "tunnellab/model.hpp"
#include "tunnellab/scattering.hpp"

namespace tunnellab {

/// Raised when a stationary-phase prediction is requested for a spectral
/// amplitude the auditor does not classify as sharply peaked.
class SpmInapplicableError : public std::runtime_error {
 public:
  explicit SpmInapplicableError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Group velocity and phase times evaluated at a peak-center energy E1:
///   v       = dE/dk = k/m,
///   tau     = dphi/dE (single-barrier phase time, exact),
///   tau_ors = 2m/(k chi) (opaque-barrier limit; independent of a and L).
struct PhaseTimes {
  double E1;
  double v;
  double tau;
  double tau_ors;
};

/// Exact dphi/dE for phi = -atan(Delta- tanh chi a):
///   (m a / 2k) (1 + Delta-^2 tanh^2 chi a)^{-1}
///     [ (k/chi + chi/k)^2 tanh(chi a)/(chi a) - (k^2/chi^2 - 1)/cosh^2(chi a) ]
/// Returns 0 for a = 0.
double phase_time_exact(double E, const BarrierSystem& sys);

/// 2m / (k chi). Diverges at both window endpoints, minimal at E = V0/2.
double ors_phase_time(double E, const BarrierSystem& sys);

PhaseTimes phase_times_at(double E1, const BarrierSystem& sys);

enum class CenterEstimator { argmax, mean };

struct PeakCenter {
  double E1 = 0.0;        // value of the selected estimator
  double argmax_E1 = 0.0; // parabolic-refined grid argmax
  double mean_E1 = 0.0;   // amplitude-weighted mean
  bool estimators_disagree = false;  // |argmax - mean| > delta/2
  bool below_E0 = false;  // transmitted amplitudes are expected above E0
};

/// Center energy of the (channel, n) spectral amplitude. Refuses with
/// SpmInapplicableError when the audit verdict is not_sharply_peaked:
/// a peak center of a non-peaked amplitude is not a meaningful input to a
/// stationary-phase schedule.
PeakCenter find_E1(Channel channel, int n, const BarrierSystem& sys,
                   const PacketSpec& spec, const EnergyGrid& grid,
                   CenterEstimator estimator = CenterEstimator::argmax,
                   const AuditOptions& audit_options = {});

/// Where a schedule is read out: x = L+a, x = 0, or x = a.
enum class Station { exit_face, entry_face, cavity_entry_face };

Station station_for(Channel channel);

/// Peak times of the first n_max+1 bounce sub-packets of one channel, all
/// affine in the separation d:
///   transmitted  @ x=L+a : t_n = (2n+1) d/v + 2(n+1) tau
///   reflected    @ x=0   : t_n = 2n d/v + (2n+1) tau
///   cavity right @ x=a   : t_n = 2n d/v + (2n+1) tau      (departures)
///   cavity left  @ x=a   : t_n = 2(n+1) d/v + 2(n+1) tau  (arrivals)
struct PeakSchedule {
  Channel channel;
  Station station;
  std::vector<std::pair<int, double>> entries;
};

PeakSchedule peak_schedule(Channel channel, int n_max, double separation,
                           const PhaseTimes& times);

/// Slope of t_n in d for branch n of a channel (1/v units of the affine law).
double schedule_slope(Channel channel, int n);

struct OrsComparisonRow {
  double separation;
  double rigorous_t0;  // n = 0 transmitted schedule time
  double tau_ors;      // separation-independent by construction
};

/// Tabulates the opaque-barrier phase time against the n = 0 rigorous
/// schedule over a sweep of separations. The rigorous column is affine in d
/// with slope 1/v; the ORS column is constant.
struct OrsComparison {
  PhaseTimes times;   // at the transmitted n = 0 peak center
  PeakCenter center;
  std::vector<OrsComparisonRow> rows;
  double rigorous_slope = 0.0;
  bool separation_dependent = false;
};

OrsComparison ors_vs_rigorous_report(const BarrierSystem& sys_template,
                                     const PacketSpec& spec,
                                     std::span<const double> separations,
                                     const EnergyGrid& grid);

}  // namespace tunnellab
