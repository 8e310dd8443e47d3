#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tunnellab/model.hpp"
#include "tunnellab/spm.hpp"

namespace tunnellab {

/// Flat key = value run configuration ('#' comments, UTF-8, locale-free
/// parsing). Defaults encode the canonical setup 2m = V0 = 1, a = 5, d = 8,
/// E0 = 0.5, delta = 0.1.
struct RunConfig {
  BarrierSystem system;
  PacketSpec packet;
  std::size_t grid_nodes = 2048;
  double grid_width = 8.0;        // half-width of the energy window, in sigmas
  double prominence = 0.05;       // peak detection threshold, fraction of max
  double t_step = 0.0;            // 0 = auto (tau/50)
  double t_max = 0.0;             // 0 = auto (n=3 schedule + 5 tau)
  std::vector<double> d_list = {8.0, 10.0, 12.0};
  CenterEstimator e1_estimator = CenterEstimator::argmax;

  /// Field-by-field validation; throws std::invalid_argument naming the key.
  void validate() const;

  static RunConfig parse(std::istream& in);
  static RunConfig parse_file(const std::string& path);

  /// Applies one "key=value" override (the --set flag).
  void apply_override(std::string_view key_value);

  /// Canonical text form; parse(serialize()) reproduces the config exactly.
  std::string serialize() const;
};

}  // namespace tunnellab
