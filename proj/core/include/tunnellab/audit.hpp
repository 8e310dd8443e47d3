#pragma once

#include <vector>

namespace tunnellab {

/// A real function sampled on a weighted grid (uniform grids use equal
/// weights; quadrature grids bring their own).
struct SpectralFunction {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> values;
};

enum class Verdict { sharply_peaked, not_sharply_peaked };

/// The quantitative reading of "a sharply peaked function such as a
/// Gaussian". The two thresholds are calibrations, not derived quantities.
struct AuditOptions {
  double extremum_floor = 0.01;   // local maxima of |f| below this fraction
                                  // of the global max are ignored
  double mass_threshold = 0.99;   // required |f|-mass fraction within
                                  // +-3 sigma of the peak
};

struct AuditReport {
  int sign_changes = 0;
  int extrema_count = 0;          // qualified local maxima of |f|
  double peak_energy = 0.0;       // grid argmax of |f|
  double mass_concentration = 0.0;
  Verdict verdict = Verdict::not_sharply_peaked;
};

/// verdict = sharply_peaked iff sign_changes == 0, extrema_count == 1 and
/// mass_concentration >= mass_threshold. sigma is taken from the second
/// central moment of the |f|-weighted distribution so sign-alternating
/// functions are still measurable. Requires >= 64 samples; throws
/// std::invalid_argument on short or all-zero input. Non-finite samples
/// (resonance poles) are excluded from the moments and force
/// not_sharply_peaked.
AuditReport audit(const SpectralFunction& samples, const AuditOptions& options = {});

/// G(E) = e^{-E^2} cos(tau E): single-signed nowhere near, the textbook
/// trap for a stationary-phase argument.
double counterexample_G(double E, double tau);

struct CounterexampleValue {
  double quadrature;
  double closed_form;
};

/// I(t) = integral of G(E) e^{itE} dE. The closed form is
/// (sqrt(pi)/2) (e^{-(t+tau)^2/4} + e^{-(t-tau)^2/4}): appreciable at
/// t = +-tau, not at t = 0. The quadrature column integrates G(E) cos(tE)
/// over |E| <= 8 with composite Gauss-Legendre panels.
CounterexampleValue counterexample_I(double t, double tau);

/// What a blind stationary-phase reading of I(t) predicts: the only
/// stationary point of tE is t = 0. Kept for the demonstration report.
double naive_spm_prediction();

}  // namespace tunnellab
