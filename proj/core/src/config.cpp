#include "tunnellab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tunnellab/csv.hpp"

namespace tunnellab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config key '" + std::string(key) +
                                "': not a number: '" + std::string(value) + "'");
  }
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string_view::npos) comma = value.size();
    const std::string_view item = trim(value.substr(start, comma - start));
    if (!item.empty()) out.push_back(parse_number(key, item));
    start = comma + 1;
  }
  if (out.empty()) {
    throw std::invalid_argument("config key '" + std::string(key) +
                                "': empty list");
  }
  return out;
}

void apply_key(RunConfig& config, std::string_view key, std::string_view value) {
  if (key == "m") {
    config.system.m = parse_number(key, value);
  } else if (key == "V0") {
    config.system.V0 = parse_number(key, value);
  } else if (key == "a") {
    config.system.a = parse_number(key, value);
  } else if (key == "L") {
    config.system.L = parse_number(key, value);
  } else if (key == "E0") {
    config.packet.E0 = parse_number(key, value);
  } else if (key == "delta") {
    config.packet.delta = parse_number(key, value);
  } else if (key == "grid_nodes") {
    const double n = parse_number(key, value);
    if (n < 1 || n != static_cast<double>(static_cast<std::size_t>(n))) {
      throw std::invalid_argument("config key 'grid_nodes': not a positive integer");
    }
    config.grid_nodes = static_cast<std::size_t>(n);
  } else if (key == "grid_width") {
    config.grid_width = parse_number(key, value);
  } else if (key == "prominence") {
    config.prominence = parse_number(key, value);
  } else if (key == "t_step") {
    config.t_step = parse_number(key, value);
  } else if (key == "t_max") {
    config.t_max = parse_number(key, value);
  } else if (key == "d_list") {
    config.d_list = parse_list(key, value);
  } else if (key == "e1_estimator") {
    if (value == "argmax") {
      config.e1_estimator = CenterEstimator::argmax;
    } else if (value == "mean") {
      config.e1_estimator = CenterEstimator::mean;
    } else {
      throw std::invalid_argument(
          "config key 'e1_estimator': expected 'argmax' or 'mean'");
    }
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  system.validate();
  packet.validate(system);
  if (grid_nodes < 16) {
    throw std::invalid_argument("config key 'grid_nodes': must be >= 16");
  }
  if (!(grid_width > 0.0)) {
    throw std::invalid_argument("config key 'grid_width': must be > 0");
  }
  if (!(prominence > 0.0 && prominence < 1.0)) {
    throw std::invalid_argument("config key 'prominence': must be in (0, 1)");
  }
  if (t_step < 0.0) {
    throw std::invalid_argument("config key 't_step': must be >= 0 (0 = auto)");
  }
  if (t_max < 0.0) {
    throw std::invalid_argument("config key 't_max': must be >= 0 (0 = auto)");
  }
  if (d_list.empty()) {
    throw std::invalid_argument("config key 'd_list': must not be empty");
  }
  for (double d : d_list) {
    if (d < 0.0) {
      throw std::invalid_argument("config key 'd_list': separations must be >= 0");
    }
  }
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const std::size_t hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const std::size_t eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    apply_key(config, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  return config;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open config: " + path);
  }
  return parse(in);
}

void RunConfig::apply_override(std::string_view key_value) {
  const std::size_t eq = key_value.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument("--set expects key=value, got '" +
                                std::string(key_value) + "'");
  }
  apply_key(*this, trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)));
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "m = " << format_double(system.m) << '\n'
      << "V0 = " << format_double(system.V0) << '\n'
      << "a = " << format_double(system.a) << '\n'
      << "L = " << format_double(system.L) << '\n'
      << "E0 = " << format_double(packet.E0) << '\n'
      << "delta = " << format_double(packet.delta) << '\n'
      << "grid_nodes = " << grid_nodes << '\n'
      << "grid_width = " << format_double(grid_width) << '\n'
      << "prominence = " << format_double(prominence) << '\n'
      << "t_step = " << format_double(t_step) << '\n'
      << "t_max = " << format_double(t_max) << '\n';
  out << "d_list = ";
  for (std::size_t i = 0; i < d_list.size(); ++i) {
    if (i) out << ',';
    out << format_double(d_list[i]);
  }
  out << '\n';
  out << "e1_estimator = "
      << (e1_estimator == CenterEstimator::argmax ? "argmax" : "mean") << '\n';
  return out.str();
}

}  // namespace tunnellab
