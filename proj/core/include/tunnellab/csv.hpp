#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tunnellab {

/// Shortest representation that round-trips a double (17 significant
/// digits), C locale, so output is byte-stable across runs and machines
/// with the same binary. NaN and infinities print as "nan", "inf", "-inf".
std::string format_double(double value);

/// Minimal deterministic CSV assembly: comma separators, LF line endings,
/// header row first, no quoting (cells must not contain commas).
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);

  Csv& row(std::span<const double> values);
  Csv& row(std::initializer_list<double> values);
  Csv& row(const std::vector<std::string>& cells);

  const std::string& str() const { return text_; }

  /// Throws std::ios_base::failure on any write error, with the path.
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

}  // namespace tunnellab
