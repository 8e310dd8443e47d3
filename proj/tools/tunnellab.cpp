// tunnellab: double-barrier tunneling laboratory.
//
// Subcommands cover the pipeline end to end: exact stationary coefficients
// (coeffs), the multiple-reflection expansion (series), the peaked-amplitude
// auditor (audit), stationary-phase peak schedules (schedule), brute-force
// wave-packet synthesis (propagate, peaks), the separation experiment and
// its verdict (verdict), figure-data dumps (figures), and the pedagogical
// stationary-phase counterexample (counterexample).
//
// Exit codes: 0 success, 1 usage, 2 config/precondition, 3 numeric failure,
// 4 I/O.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tunnellab/audit.hpp"
#include "tunnellab/config.hpp"
#include "tunnellab/csv.hpp"
#include "tunnellab/model.hpp"
#include "tunnellab/packets.hpp"
#include "tunnellab/scattering.hpp"
#include "tunnellab/spm.hpp"

namespace tl = tunnellab;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::vector<double> d_list_flag;
};

tl::RunConfig load_config(const CommonOptions& common) {
  tl::RunConfig config;
  if (!common.config_path.empty()) {
    config = tl::RunConfig::parse_file(common.config_path);
  }
  for (const std::string& kv : common.overrides) {
    config.apply_override(kv);
  }
  if (!common.d_list_flag.empty()) {
    config.d_list = common.d_list_flag;
  }
  config.validate();
  if (config.packet.tails_clipped(config.system)) {
    std::cerr << "warning: [E0 - 3 delta, E0 + 3 delta] is clipped by the "
                 "tunneling window (0, V0)\n";
  }
  return config;
}

fs::path out_path(const CommonOptions& common, const std::string& name) {
  fs::path dir(common.out_dir);
  if (!dir.empty() && !fs::exists(dir)) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      throw std::ios_base::failure("cannot create output directory: " +
                                   dir.string());
    }
  }
  return dir / name;
}

void save_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

double auto_t_step(const tl::RunConfig& config, const tl::PhaseTimes& times) {
  return config.t_step > 0.0 ? config.t_step : times.tau / 50.0;
}

double auto_t_max(const tl::RunConfig& config, const tl::PhaseTimes& times,
                  double separation) {
  if (config.t_max > 0.0) return config.t_max;
  // n = 3 transmitted schedule time plus a 5 tau margin.
  return 7.0 * separation / times.v + 8.0 * times.tau + 5.0 * times.tau;
}

std::vector<double> uniform_times(double lo, double hi, double step) {
  std::vector<double> t;
  const auto count = static_cast<std::size_t>((hi - lo) / step) + 1;
  t.reserve(count);
  for (std::size_t i = 0; i < count; ++i) t.push_back(lo + step * i);
  return t;
}

// Oscillation budget of the synthesis integrand across the energy window:
// phase = kx - Et varies by |x| dk + t dE. The grid has to resolve it.
void check_nyquist(const tl::RunConfig& config, const tl::EnergyGrid& grid,
                   const tl::BarrierSystem& sys, double x_distance,
                   double t_max) {
  const double E_lo = grid.nodes.front();
  const double E_hi = grid.nodes.back();
  const double k_lo = std::sqrt(2.0 * sys.m * E_lo);
  const double k_hi = std::sqrt(2.0 * sys.m * E_hi);
  const double span =
      std::abs(x_distance) * (k_hi - k_lo) + std::abs(t_max) * (E_hi - E_lo);
  const double needed = 8.0 * span / (2.0 * std::numbers::pi);
  if (static_cast<double>(grid.size()) < needed) {
    throw std::invalid_argument(
        "config key 'grid_nodes': " + std::to_string(grid.size()) +
        " nodes cannot resolve the requested span (need >= " +
        std::to_string(static_cast<long>(std::ceil(needed))) + ")");
  }
}

std::string verdict_str(tl::Verdict v) {
  return v == tl::Verdict::sharply_peaked ? "sharply_peaked"
                                          : "not_sharply_peaked";
}

// ---------------------------------------------------------------------------

void cmd_coeffs(const CommonOptions& common) {
  const tl::RunConfig config = load_config(common);
  const tl::EnergyGrid grid = tl::build_energy_grid(
      config.packet, config.system, config.grid_nodes, config.grid_width);
  tl::Csv csv({"E", "re_T", "im_T", "abs2_T", "re_R", "im_R", "abs2_R",
               "fluxsum"});
  for (double E : grid.nodes) {
    const tl::StationaryCoefficients c =
        tl::stationary_coefficients(E, config.system);
    csv.row({E, c.T.real(), c.T.imag(), std::norm(c.T), c.R.real(), c.R.imag(),
             std::norm(c.R), std::norm(c.T) + std::norm(c.R)});
  }
  csv.save(out_path(common, "coeffs.csv"));
  std::cout << "wrote coeffs.csv (" << grid.size() << " energies)\n";
}

void cmd_series(const CommonOptions& common, const std::string& channel_name,
                std::vector<int> n_list) {
  const tl::RunConfig config = load_config(common);
  const tl::Channel channel = tl::parse_channel(channel_name);
  if (n_list.empty()) n_list = {0, 10, 20};
  const tl::EnergyGrid grid = tl::build_energy_grid(
      config.packet, config.system, config.grid_nodes, config.grid_width);

  std::vector<std::string> header{"E"};
  for (int n : n_list) header.push_back("amp_n" + std::to_string(n));
  tl::Csv amps(header);
  std::vector<double> row(header.size());
  for (double E : grid.nodes) {
    row[0] = E;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      row[i + 1] =
          tl::series_term(channel, n_list[i], E, config.system, config.packet)
              .amplitude;
    }
    amps.row(row);
  }
  amps.save(out_path(common, "series_amplitudes.csv"));

  // Convergence of the partial sums toward the closed form at the packet
  // center, with the geometric tail bound q^{N+1}/(1-q), q = |R0|^2.
  const double E_star = config.packet.E0;
  const tl::Complex closed =
      tl::series_closed_form(channel, E_star, config.system);
  const double q =
      std::norm(tl::single_barrier(E_star, config.system).R0);
  tl::Csv conv({"N", "abs_error", "geometric_bound"});
  for (int N = 0; N <= 25; ++N) {
    const tl::Complex partial =
        tl::series_partial_sum(channel, N, E_star, config.system);
    conv.row({static_cast<double>(N), std::abs(closed - partial),
              std::pow(q, N + 1) / (1.0 - q)});
  }
  conv.save(out_path(common, "series_convergence.csv"));
  std::cout << "wrote series_amplitudes.csv, series_convergence.csv\n";
}

void cmd_audit(const CommonOptions& common, std::vector<int> n_list) {
  const tl::RunConfig config = load_config(common);
  if (n_list.empty()) n_list = {0, 10, 20};
  const tl::EnergyGrid grid = tl::build_energy_grid(
      config.packet, config.system, config.grid_nodes, config.grid_width);

  tl::Csv csv({"function", "sign_changes", "extrema_count", "peak_energy",
               "mass_concentration", "verdict"});
  auto add = [&](const std::string& name, const std::vector<double>& values) {
    const tl::AuditReport report =
        tl::audit({grid.nodes, grid.weights, values});
    csv.row(std::vector<std::string>{
        name, std::to_string(report.sign_changes),
        std::to_string(report.extrema_count),
        tl::format_double(report.peak_energy),
        tl::format_double(report.mass_concentration),
        verdict_str(report.verdict)});
  };

  std::vector<double> critique;
  critique.reserve(grid.size());
  for (double E : grid.nodes) {
    critique.push_back(
        tl::critique_amplitude(E, config.system, config.packet));
  }
  add("critique_amplitude", critique);

  for (int n : n_list) {
    std::vector<double> amp;
    amp.reserve(grid.size());
    for (double E : grid.nodes) {
      amp.push_back(tl::series_term(tl::Channel::transmitted, n, E,
                                    config.system, config.packet)
                        .amplitude);
    }
    add("term_amplitude_n" + std::to_string(n), amp);
  }
  csv.save(out_path(common, "audit.csv"));

  // Resonance poles reported next to the verdicts; they are candidate
  // "E1 where the amplitude diverges" readings, never adopted as E1.
  tl::Csv res({"E_resonance", "width_estimate"});
  for (double e : tl::resonance_energies(config.system)) {
    res.row({e, tl::resonance_width(e, config.system)});
  }
  res.save(out_path(common, "resonances.csv"));
  std::cout << "wrote audit.csv, resonances.csv\n";
}

void cmd_schedule(const CommonOptions& common, int n_max) {
  const tl::RunConfig config = load_config(common);
  const tl::EnergyGrid grid = tl::build_energy_grid(
      config.packet, config.system, config.grid_nodes, config.grid_width);
  const double d = config.system.separation();

  tl::Csv times_csv({"channel", "E1", "v", "tau", "tau_ors"});
  tl::Csv csv({"channel", "station_x", "n", "time"});
  for (tl::Channel channel :
       {tl::Channel::transmitted, tl::Channel::reflected,
        tl::Channel::cavity_right, tl::Channel::cavity_left}) {
    const tl::PeakCenter center = tl::find_E1(
        channel, 0, config.system, config.packet, grid, config.e1_estimator);
    const tl::PhaseTimes times = tl::phase_times_at(center.E1, config.system);
    times_csv.row(std::vector<std::string>{
        std::string(tl::to_string(channel)), tl::format_double(times.E1),
        tl::format_double(times.v), tl::format_double(times.tau),
        tl::format_double(times.tau_ors)});
    const tl::PeakSchedule schedule =
        tl::peak_schedule(channel, n_max, d, times);
    double station_x = 0.0;
    switch (schedule.station) {
      case tl::Station::exit_face: station_x = config.system.L + config.system.a; break;
      case tl::Station::entry_face: station_x = 0.0; break;
      case tl::Station::cavity_entry_face: station_x = config.system.a; break;
    }
    for (const auto& [n, t] : schedule.entries) {
      csv.row(std::vector<std::string>{std::string(tl::to_string(channel)),
                                       tl::format_double(station_x),
                                       std::to_string(n),
                                       tl::format_double(t)});
    }
  }
  csv.save(out_path(common, "schedule.csv"));
  times_csv.save(out_path(common, "phase_times.csv"));
  std::cout << "wrote schedule.csv, phase_times.csv\n";
}

void cmd_propagate(const CommonOptions& common, const std::string& region_name,
                   const std::string& component_name, double station,
                   int term_n) {
  const tl::RunConfig config = load_config(common);
  tl::Readout readout;
  if (region_name == "incident") {
    readout.region = tl::Region::incident_side;
  } else if (region_name == "cavity") {
    readout.region = tl::Region::cavity;
  } else if (region_name == "transmitted") {
    readout.region = tl::Region::transmitted_side;
  } else {
    throw CLI::ValidationError("--region",
                               "expected incident, cavity or transmitted");
  }
  if (component_name == "reflected") {
    readout.component = tl::Readout::Component::reflected_part;
  }

  const tl::EnergyGrid grid = tl::resonance_refined_grid(
      config.packet, config.system, config.grid_nodes, config.grid_width);
  const tl::PeakCenter center =
      tl::find_E1(tl::Channel::transmitted, 0, config.system, config.packet,
                  grid, config.e1_estimator);
  const tl::PhaseTimes times = tl::phase_times_at(center.E1, config.system);
  const double t_step = auto_t_step(config, times);
  const double t_max = auto_t_max(config, times, config.system.separation());
  check_nyquist(config, grid, config.system, station, t_max);
  const std::vector<double> t_grid = uniform_times(0.0, t_max, t_step);

  if (term_n >= 0) {
    tl::Channel channel = tl::Channel::transmitted;
    if (readout.region == tl::Region::incident_side) {
      channel = tl::Channel::reflected;
    } else if (readout.region == tl::Region::cavity) {
      channel = tl::Channel::cavity_right;
    }
    const std::vector<double> dens = tl::term_density_timeseries(
        channel, term_n, station, t_grid, config.system, config.packet, grid);
    tl::Csv csv({"t", "density"});
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      csv.row({t_grid[i], dens[i]});
    }
    csv.save(out_path(common, "propagate.csv"));
  } else {
    const std::vector<tl::FieldSample> field = tl::field_timeseries(
        station, t_grid, readout, config.system, config.packet, grid);
    tl::Csv csv({"t", "density", "re_psi", "im_psi"});
    for (const tl::FieldSample& s : field) {
      csv.row({s.t, s.density, s.psi.real(), s.psi.imag()});
    }
    csv.save(out_path(common, "propagate.csv"));
  }
  std::cout << "wrote propagate.csv (" << t_grid.size() << " samples)\n";
}

void cmd_peaks(const CommonOptions& common, const std::string& region_name,
               double station, int term_n) {
  const tl::RunConfig config = load_config(common);
  tl::Channel channel = tl::Channel::transmitted;
  tl::Readout readout{tl::Region::transmitted_side};
  if (region_name == "incident") {
    channel = tl::Channel::reflected;
    readout = {tl::Region::incident_side,
               tl::Readout::Component::reflected_part};
  } else if (region_name == "cavity") {
    channel = tl::Channel::cavity_right;
    readout = {tl::Region::cavity};
  } else if (region_name != "transmitted") {
    throw CLI::ValidationError("--region",
                               "expected incident, cavity or transmitted");
  }

  const tl::EnergyGrid grid = tl::resonance_refined_grid(
      config.packet, config.system, config.grid_nodes, config.grid_width);
  const tl::PeakCenter center = tl::find_E1(
      channel, std::max(term_n, 0), config.system, config.packet, grid,
      config.e1_estimator);
  const tl::PhaseTimes times = tl::phase_times_at(center.E1, config.system);
  const double t_step = auto_t_step(config, times);
  const double t_max = auto_t_max(config, times, config.system.separation());
  check_nyquist(config, grid, config.system, station, t_max);
  const std::vector<double> t_grid = uniform_times(0.0, t_max, t_step);

  const std::vector<double> dens =
      term_n >= 0 ? tl::term_density_timeseries(channel, term_n, station,
                                                t_grid, config.system,
                                                config.packet, grid)
                  : tl::density_timeseries(station, t_grid, readout,
                                           config.system, config.packet, grid);
  std::vector<tl::PeakEvent> events =
      tl::detect_peaks(dens, t_grid, config.prominence);
  const tl::PeakSchedule schedule = tl::peak_schedule(
      channel, 6, config.system.separation(), times);
  tl::assign_branches(events, schedule);

  tl::Csv csv({"time", "height", "n_assigned"});
  for (const tl::PeakEvent& e : events) {
    csv.row(std::vector<std::string>{
        tl::format_double(e.time), tl::format_double(e.height),
        e.n_assigned ? std::to_string(*e.n_assigned) : ""});
  }
  csv.save(out_path(common, "peaks.csv"));
  std::cout << "wrote peaks.csv (" << events.size() << " events)\n";
}

void cmd_counterexample(const CommonOptions& common, double tau) {
  tl::Csv csv({"t", "quadrature", "closed_form"});
  double max_err = 0.0;
  double best_t = 0.0, best_val = -1.0;
  for (int i = 0; i <= 2400; ++i) {
    const double t = -12.0 + i * 0.01;
    const tl::CounterexampleValue v = tl::counterexample_I(t, tau);
    max_err = std::max(max_err, std::abs(v.quadrature - v.closed_form));
    if (v.closed_form > best_val) {
      best_val = v.closed_form;
      best_t = t;
    }
    csv.row({t, v.quadrature, v.closed_form});
  }
  csv.save(out_path(common, "counterexample.csv"));

  const double at_naive = tl::counterexample_I(tl::naive_spm_prediction(), tau)
                              .closed_form;
  std::ostringstream report;
  report << "counterexample G(E) = exp(-E^2) cos(tau E), tau = "
         << tl::format_double(tau) << "\n"
         << "naive stationary-phase prediction: peak at t = "
         << tl::format_double(tl::naive_spm_prediction()) << "\n"
         << "measured argmax of I(t): t = " << tl::format_double(best_t)
         << "\n"
         << "I(argmax) / I(naive) = "
         << tl::format_double(best_val / at_naive) << "\n"
         << "max |quadrature - closed form| over t in [-12, 12]: "
         << tl::format_double(max_err) << "\n";
  save_text(out_path(common, "counterexample_summary.txt"), report.str());
  std::cout << report.str();
}

void cmd_figures(const CommonOptions& common, int figure) {
  const tl::RunConfig config = load_config(common);
  const tl::BarrierSystem& sys = config.system;
  const tl::PacketSpec& packet = config.packet;

  switch (figure) {
    case 1: {
      tl::Csv csv({"E", "G"});
      for (int i = 0; i <= 800; ++i) {
        const double E = -4.0 + 8.0 * i / 800.0;
        csv.row({E, tl::counterexample_G(E, 5.0)});
      }
      csv.save(out_path(common, "fig1.csv"));
      break;
    }
    case 2: {
      tl::Csv csv({"t", "I_closed", "I_quadrature"});
      for (int i = 0; i <= 2400; ++i) {
        const double t = -12.0 + 0.01 * i;
        const tl::CounterexampleValue v = tl::counterexample_I(t, 5.0);
        csv.row({t, v.closed_form, v.quadrature});
      }
      csv.save(out_path(common, "fig2.csv"));
      break;
    }
    case 3: {
      const double d0 = sys.separation();
      for (double d : {d0, d0 + 1.0}) {
        tl::BarrierSystem s = sys;
        s.L = s.a + d;
        tl::Csv csv({"E_over_V0", "amplitude"});
        for (int i = 1; i < 2000; ++i) {
          const double E = sys.V0 * i / 2000.0;
          csv.row({E / sys.V0, tl::critique_amplitude(E, s, packet)});
        }
        char name[32];
        std::snprintf(name, sizeof(name), "fig3_d%g.csv", d);
        csv.save(out_path(common, name));
      }
      break;
    }
    case 4: {
      tl::Csv csv({"E_over_V0", "dtheta_dE"});
      for (int i = 1; i < 2000; ++i) {
        const double E = sys.V0 * i / 2000.0;
        csv.row({E / sys.V0, tl::ors_phase_time(E, sys)});
      }
      csv.save(out_path(common, "fig4.csv"));
      break;
    }
    case 5: {
      tl::Csv csv({"E_over_V0", "amp_n0", "amp_n10", "amp_n20"});
      for (int i = 1; i < 2000; ++i) {
        const double E = sys.V0 * i / 2000.0;
        csv.row({E / sys.V0,
                 tl::series_term(tl::Channel::transmitted, 0, E, sys, packet)
                     .amplitude,
                 tl::series_term(tl::Channel::transmitted, 10, E, sys, packet)
                     .amplitude,
                 tl::series_term(tl::Channel::transmitted, 20, E, sys, packet)
                     .amplitude});
      }
      csv.save(out_path(common, "fig5.csv"));
      break;
    }
    case 6: {
      const tl::EnergyGrid grid = tl::build_energy_grid(
          packet, sys, config.grid_nodes, config.grid_width);
      const tl::PeakCenter center = tl::find_E1(
          tl::Channel::transmitted, 0, sys, packet, grid, config.e1_estimator);
      const tl::PhaseTimes times = tl::phase_times_at(center.E1, sys);
      const double d = sys.separation();
      const double v = times.v;
      const double tau = times.tau;
      const double flight = d / v;
      const double lead = flight + 2.0 * tau;

      tl::Csv csv({"segment", "n", "t_start", "x_start", "t_end", "x_end"});
      auto seg = [&](const std::string& kind, int n, double t0, double x0,
                     double t1, double x1) {
        csv.row(std::vector<std::string>{kind, std::to_string(n),
                                         tl::format_double(t0),
                                         tl::format_double(x0),
                                         tl::format_double(t1),
                                         tl::format_double(x1)});
      };

      seg("incident", 0, -lead, -v * lead, 0.0, 0.0);
      seg("barrier1_cross", 0, 0.0, 0.0, tau, sys.a);
      seg("face_reflection", 0, tau, 0.0, tau + lead, -v * lead);
      for (int n = 0; n <= 3; ++n) {
        const double t_right = 2 * n * flight + (2 * n + 1) * tau;
        seg("cavity_right", n, t_right, sys.a, t_right + flight, sys.L);
        const double t_exit = (2 * n + 1) * flight + 2 * (n + 1) * tau;
        seg("barrier2_cross", n, t_right + flight, sys.L, t_exit,
            sys.L + sys.a);
        seg("transmitted_free", n, t_exit, sys.L + sys.a, t_exit + lead,
            sys.L + sys.a + v * lead);
        const double t_back = 2 * (n + 1) * (flight + tau);
        seg("cavity_left", n, t_right + flight + tau, sys.L, t_back, sys.a);
        const double t_dep = 2 * (n + 1) * flight + (2 * n + 3) * tau;
        seg("barrier1_back_cross", n + 1, t_back, sys.a, t_dep, 0.0);
        seg("reflected_free", n + 1, t_dep, 0.0, t_dep + lead, -v * lead);
      }
      csv.save(out_path(common, "fig6.csv"));
      break;
    }
    default:
      throw CLI::ValidationError("--figure", "figure id must be 1..6");
  }
  std::cout << "wrote figure " << figure << " data\n";
}

void cmd_verdict(const CommonOptions& common) {
  const tl::RunConfig config = load_config(common);
  const tl::BarrierSystem& sys = config.system;
  const tl::PacketSpec& packet = config.packet;

  if (sys.a == 0.0) {
    const std::string text =
        "verdict: no tunneling regime (a = 0, transmission is unity at "
        "every energy; nothing to audit)\n";
    save_text(out_path(common, "verdict.txt"), text);
    std::cout << text;
    return;
  }

  std::ostringstream report;
  report << "tunnellab verdict\n"
         << "=================\n"
         << "system: m = " << tl::format_double(sys.m)
         << ", V0 = " << tl::format_double(sys.V0)
         << ", a = " << tl::format_double(sys.a)
         << ", d = " << tl::format_double(sys.separation()) << "\n"
         << "packet: E0 = " << tl::format_double(packet.E0)
         << ", delta = " << tl::format_double(packet.delta) << "\n\n";

  // -- audits ---------------------------------------------------------
  const tl::EnergyGrid plain_grid =
      tl::build_energy_grid(packet, sys, config.grid_nodes, config.grid_width);
  tl::Csv audits({"function", "sign_changes", "extrema_count", "peak_energy",
                  "mass_concentration", "verdict"});

  std::vector<double> critique;
  critique.reserve(plain_grid.size());
  for (double E : plain_grid.nodes) {
    critique.push_back(tl::critique_amplitude(E, sys, packet));
  }
  const tl::AuditReport ors_report =
      tl::audit({plain_grid.nodes, plain_grid.weights, critique});
  audits.row(std::vector<std::string>{
      "critique_amplitude", std::to_string(ors_report.sign_changes),
      std::to_string(ors_report.extrema_count),
      tl::format_double(ors_report.peak_energy),
      tl::format_double(ors_report.mass_concentration),
      verdict_str(ors_report.verdict)});

  report << "ORS critique amplitude non-Gaussian: "
         << (ors_report.verdict == tl::Verdict::not_sharply_peaked ? "yes"
                                                                   : "no")
         << " (sign_changes=" << ors_report.sign_changes
         << ", extrema=" << ors_report.extrema_count << ")\n";

  for (int n : {0, 10, 20}) {
    std::vector<double> amp;
    amp.reserve(plain_grid.size());
    for (double E : plain_grid.nodes) {
      amp.push_back(
          tl::series_term(tl::Channel::transmitted, n, E, sys, packet)
              .amplitude);
    }
    const tl::AuditReport r =
        tl::audit({plain_grid.nodes, plain_grid.weights, amp});
    audits.row(std::vector<std::string>{
        "term_amplitude_n" + std::to_string(n), std::to_string(r.sign_changes),
        std::to_string(r.extrema_count), tl::format_double(r.peak_energy),
        tl::format_double(r.mass_concentration), verdict_str(r.verdict)});
    report << "term amplitude n=" << n << ": " << verdict_str(r.verdict)
           << "\n";
  }
  audits.save(out_path(common, "audits.csv"));

  // -- the separation experiment ---------------------------------------
  const tl::GridSpec grid_spec{config.grid_nodes, config.grid_width};
  const tl::DetectionSpec detection{config.prominence, config.t_step,
                                    config.t_max};
  const tl::SeparationFit fit = tl::arrival_vs_separation(
      config.d_list, sys, packet, grid_spec, detection);

  tl::Csv arrivals({"d", "first_peak", "second_peak", "raw_first_peak",
                    "residual"});
  for (std::size_t i = 0; i < fit.separations.size(); ++i) {
    arrivals.row({fit.separations[i], fit.first_peak_times[i],
                  fit.second_peak_times[i], fit.raw_first_peak_times[i],
                  fit.residuals.size() > i ? fit.residuals[i] : 0.0});
  }
  arrivals.save(out_path(common, "arrival_fit.csv"));

  const double inv_v = 1.0 / fit.times.v;
  const double two_tau = 2.0 * fit.times.tau;
  report << "\nseparation experiment (bounce-resolved, transmitted n=0):\n"
         << "  E1 = " << tl::format_double(fit.times.E1)
         << " (argmax estimator; E1 > E0: "
         << (fit.center.below_E0 ? "no" : "yes") << ")\n"
         << "  fitted slope     = " << tl::format_double(fit.slope)
         << "  (1/v = " << tl::format_double(inv_v) << ")\n"
         << "  fitted intercept = " << tl::format_double(fit.intercept)
         << "  (2 tau = " << tl::format_double(two_tau) << ")\n"
         << "  slope standard error = " << tl::format_double(fit.slope_stderr)
         << "\n"
         << "  zero-slope (separation-independent) hypothesis "
         << (std::isfinite(fit.slope_stderr) &&
                     fit.slope > 10.0 * fit.slope_stderr
                 ? "REJECTED"
                 : "not rejected")
         << " (slope / stderr = "
         << tl::format_double(fit.slope / fit.slope_stderr) << ")\n"
         << "  merged-peak regime for raw station series: "
         << (fit.merged_peak_regime ? "yes" : "no") << "\n";
  if (!fit.failed.empty()) {
    report << "  detection failures at d =";
    for (double d : fit.failed) report << " " << tl::format_double(d);
    report << "\n";
  }

  // -- reflected bookkeeping -------------------------------------------
  const tl::ReflectedCheck refl = tl::reflected_departures(
      config.d_list, sys, packet, grid_spec, detection);
  tl::Csv refl_csv({"d", "first_departure", "second_departure"});
  for (std::size_t i = 0; i < refl.separations.size(); ++i) {
    refl_csv.row({refl.separations[i], refl.first_departures[i],
                  refl.second_departures[i]});
  }
  refl_csv.save(out_path(common, "reflected.csv"));
  report << "\nreflected channel:\n"
         << "  first departure spread over d sweep = "
         << tl::format_double(refl.first_spread)
         << " (expected ~0: the face bounce carries no separation)\n"
         << "  tau at reflected n=0 E1 = "
         << tl::format_double(refl.first_times.tau) << "\n";

  // -- ORS comparison ----------------------------------------------------
  const tl::OrsComparison cmp = tl::ors_vs_rigorous_report(
      sys, packet, config.d_list, plain_grid);
  tl::Csv ors_csv({"d", "rigorous_t0", "tau_ors"});
  for (const tl::OrsComparisonRow& row : cmp.rows) {
    ors_csv.row({row.separation, row.rigorous_t0, row.tau_ors});
  }
  ors_csv.save(out_path(common, "ors_comparison.csv"));
  report << "\nORS vs rigorous schedule (n=0):\n"
         << "  tau_ors = " << tl::format_double(cmp.times.tau_ors)
         << " for every d; rigorous t0 = d/v + 2 tau, slope "
         << tl::format_double(cmp.rigorous_slope) << "\n";

  save_text(out_path(common, "verdict.txt"), report.str());
  std::cout << report.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tunnellab: double-barrier tunneling-time laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  app.add_option("--config", common.config_path, "config file (key = value)");
  app.add_option("--out", common.out_dir, "output directory (default .)");
  app.add_option("--set", common.overrides, "override: key=value (repeatable)");
  app.add_option("--d-list", common.d_list_flag,
                 "comma-separated separations for verdict/report sweeps")
      ->delimiter(',');

  CLI::App* coeffs = app.add_subcommand("coeffs", "exact T/R table on the energy grid");

  std::string channel_name = "transmitted";
  std::vector<int> n_list;
  CLI::App* series = app.add_subcommand("series", "multiple-reflection term amplitudes and convergence");
  series->add_option("--channel", channel_name, "transmitted|reflected|cavity_right|cavity_left");
  series->add_option("--n-list", n_list, "term indices")->delimiter(',');

  std::vector<int> audit_n_list;
  CLI::App* audit_cmd = app.add_subcommand("audit", "sharply-peaked audits of the key amplitudes");
  audit_cmd->add_option("--n-list", audit_n_list, "term indices")->delimiter(',');

  int n_max = 3;
  CLI::App* schedule = app.add_subcommand("schedule", "stationary-phase peak schedules per channel");
  schedule->add_option("--n-max", n_max, "largest bounce index");

  std::string region = "transmitted";
  std::string component = "full";
  double station = 0.0;
  int term_n = -1;
  CLI::App* propagate = app.add_subcommand("propagate", "density time series at a station");
  propagate->add_option("--region", region, "incident|cavity|transmitted");
  propagate->add_option("--component", component, "full|reflected (incident side)");
  propagate->add_option("--station", station, "detector position x")->required();
  propagate->add_option("--term", term_n, "bounce-resolved: single term index");

  std::string peaks_region = "transmitted";
  double peaks_station = 0.0;
  int peaks_term = -1;
  CLI::App* peaks = app.add_subcommand("peaks", "detected peaks with branch assignment");
  peaks->add_option("--region", peaks_region, "incident|cavity|transmitted");
  peaks->add_option("--station", peaks_station, "detector position x")->required();
  peaks->add_option("--term", peaks_term, "bounce-resolved: single term index");

  CLI::App* verdict = app.add_subcommand("verdict", "full audit + separation experiment report");

  int figure = 0;
  CLI::App* figures = app.add_subcommand("figures", "reference curve data");
  figures->add_option("--figure", figure, "figure id 1..6")->required();

  double tau = 5.0;
  CLI::App* counter = app.add_subcommand("counterexample", "exp(-E^2) cos(tau E) stationary-phase failure demo");
  counter->add_option("--tau", tau, "oscillation parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (coeffs->parsed()) cmd_coeffs(common);
    if (series->parsed()) cmd_series(common, channel_name, n_list);
    if (audit_cmd->parsed()) cmd_audit(common, audit_n_list);
    if (schedule->parsed()) cmd_schedule(common, n_max);
    if (propagate->parsed()) cmd_propagate(common, region, component, station, term_n);
    if (peaks->parsed()) cmd_peaks(common, peaks_region, peaks_station, peaks_term);
    if (verdict->parsed()) cmd_verdict(common);
    if (figures->parsed()) cmd_figures(common, figure);
    if (counter->parsed()) cmd_counterexample(common, tau);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
