#include <cmath>
#include <numbers>

#include <doctest.h>

#include "tunnellab/audit.hpp"
#include "tunnellab/model.hpp"
#include "tunnellab/scattering.hpp"

using namespace tunnellab;

namespace {

const BarrierSystem kCanonical{0.5, 1.0, 5.0, 13.0};
const PacketSpec kPacket{0.5, 0.1};

SpectralFunction sample_uniform(double lo, double hi, int n,
                                double (*f)(double)) {
  SpectralFunction s;
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * step;
    s.nodes.push_back(x);
    s.weights.push_back(step);
    s.values.push_back(f(x));
  }
  return s;
}

}  // namespace

TEST_SUITE("audit") {

TEST_CASE("a pure gaussian is sharply peaked") {
  const SpectralFunction s = sample_uniform(
      0.0, 1.0, 501, +[](double E) { return std::exp(-50.0 * (E - 0.5) * (E - 0.5)); });
  const AuditReport report = audit(s);
  CHECK(report.sign_changes == 0);
  CHECK(report.extrema_count == 1);
  CHECK(report.peak_energy == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(report.mass_concentration >= 0.99);
  CHECK(report.verdict == Verdict::sharply_peaked);
}

TEST_CASE("the oscillating counterexample fails the audit") {
  const SpectralFunction s = sample_uniform(
      -4.0, 4.0, 801, +[](double E) { return counterexample_G(E, 5.0); });
  const AuditReport report = audit(s);
  CHECK(report.sign_changes > 0);
  CHECK(report.extrema_count > 1);
  CHECK(report.verdict == Verdict::not_sharply_peaked);
}

TEST_CASE("the ORS critique amplitude fails the audit at canonical parameters") {
  const EnergyGrid grid = build_energy_grid(kPacket, kCanonical, 2048, 8.0);
  SpectralFunction s{grid.nodes, grid.weights, {}};
  for (double E : grid.nodes) {
    s.values.push_back(critique_amplitude(E, kCanonical, kPacket));
  }
  const AuditReport report = audit(s);
  CHECK(report.sign_changes > 0);
  CHECK(report.verdict == Verdict::not_sharply_peaked);
}

TEST_CASE("verdict is invariant under positive rescaling") {
  SpectralFunction s = sample_uniform(
      0.0, 1.0, 257, +[](double E) { return std::exp(-80.0 * (E - 0.4) * (E - 0.4)); });
  const AuditReport base = audit(s);
  for (double scale : {1e-9, 7.0, 1e12}) {
    SpectralFunction scaled = s;
    for (double& v : scaled.values) v *= scale;
    const AuditReport r = audit(scaled);
    CHECK(r.verdict == base.verdict);
    CHECK(r.sign_changes == base.sign_changes);
    CHECK(r.extrema_count == base.extrema_count);
    CHECK(r.mass_concentration ==
          doctest::Approx(base.mass_concentration).epsilon(1e-12));
  }
}

TEST_CASE("degenerate and undersized inputs are rejected") {
  SpectralFunction zeros = sample_uniform(0.0, 1.0, 128, +[](double) { return 0.0; });
  CHECK_THROWS_WITH_AS(audit(zeros), doctest::Contains("degenerate"),
                       std::invalid_argument);
  SpectralFunction small = sample_uniform(0.0, 1.0, 32, +[](double E) { return E; });
  CHECK_THROWS_AS(audit(small), std::invalid_argument);
}

TEST_CASE("counterexample G values") {
  CHECK(counterexample_G(0.0, 5.0) == 1.0);
  CHECK(counterexample_G(1.0, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  // tau = 0 is a pure gaussian: single-signed.
  const SpectralFunction s = sample_uniform(
      -4.0, 4.0, 257, +[](double E) { return counterexample_G(E, 0.0); });
  CHECK(audit(s).verdict == Verdict::sharply_peaked);
}

TEST_CASE("counterexample I: quadrature equals the closed form") {
  double max_err = 0.0;
  for (int i = 0; i <= 2400; ++i) {
    const double t = -12.0 + 0.01 * i;
    const CounterexampleValue v = counterexample_I(t, 5.0);
    max_err = std::max(max_err, std::abs(v.quadrature - v.closed_form));
  }
  CHECK(max_err <= 1e-8);
}

TEST_CASE("counterexample I: frozen values at t = 0 and t = tau") {
  // Closed form at 30-digit precision:
  //   I(0)  = sqrt(pi) e^{-25/4}        = 3.4216408677532848834e-3
  //   I(5)  = (sqrt(pi)/2)(1 + e^{-25}) = 0.88622692546506588344
  const CounterexampleValue at0 = counterexample_I(0.0, 5.0);
  CHECK(at0.closed_form ==
        doctest::Approx(3.4216408677532848834e-3).epsilon(1e-14));
  CHECK(at0.quadrature ==
        doctest::Approx(3.4216408677532848834e-3).epsilon(1e-9));
  const CounterexampleValue at5 = counterexample_I(5.0, 5.0);
  CHECK(at5.closed_form ==
        doctest::Approx(0.88622692546506588344).epsilon(1e-14));
}

TEST_CASE("counterexample I: the peak sits at |t| = tau, not at 0") {
  double best_t = 0.0, best = -1.0;
  for (int i = 0; i <= 24000; ++i) {
    const double t = -12.0 + 0.001 * i;
    const double v = counterexample_I(t, 5.0).closed_form;
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  CHECK(std::abs(std::abs(best_t) - 5.0) <= 0.01);

  // The naive stationary-phase answer t = 0 undershoots by >= e^{tau^2/4}/2.
  const double at_naive = counterexample_I(naive_spm_prediction(), 5.0).closed_form;
  CHECK(best / at_naive >= std::exp(25.0 / 4.0) / 2.0);
  CHECK(naive_spm_prediction() == 0.0);
}

TEST_CASE("tau = 0 degenerate case: naive and exact agree") {
  double best_t = 1e9, best = -1.0;
  for (int i = 0; i <= 2400; ++i) {
    const double t = -12.0 + 0.01 * i;
    const double v = counterexample_I(t, 0.0).closed_form;
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  CHECK(std::abs(best_t - naive_spm_prediction()) <= 0.01);
}

}  // TEST_SUITE
