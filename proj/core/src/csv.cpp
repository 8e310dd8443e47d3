#include "tunnellab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tunnellab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Csv::Csv(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

Csv& Csv::row(std::span<const double> values) {
  if (values.size() != columns_) {
    throw std::invalid_argument("Csv::row: column count mismatch");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    text_ += format_double(values[i]);
  }
  text_ += '\n';
  return *this;
}

Csv& Csv::row(std::initializer_list<double> values) {
  return row(std::span<const double>(values.begin(), values.size()));
}

Csv& Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw std::invalid_argument("Csv::row: column count mismatch");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

void Csv::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::ios_base::failure("cannot open for writing: " + path.string());
  }
  out << text_;
  if (!out) {
    throw std::ios_base::failure("write failed: " + path.string());
  }
}

}  // namespace tunnellab
