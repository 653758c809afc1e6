#pragma once

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtrunc {

/// Shortest representation that parses back to the same double; "NA" for NaN.
std::string format_number(double value);

/// Minimal CSV emitter. Cells are never quoted; callers pass plain tokens.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> names);
  void header(std::span<const std::string> names);
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  /// Leading text cell followed by numbers (long-format tables).
  void row(std::string_view label, std::span<const double> values);

 private:
  std::ostream& out_;
};

}  // namespace dtrunc
