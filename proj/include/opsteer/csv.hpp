#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opsteer {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Minimal CSV writer; fields never contain separators.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names);
  void field(double v);
  void field(int v);
  void field(long long v);
  void field(const std::string& v);
  void end_row();

 private:
  void sep();

  std::ostream& out_;
  bool first_ = true;
};

/// Splits CSV text into rows of fields (no quoting support).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace opsteer
