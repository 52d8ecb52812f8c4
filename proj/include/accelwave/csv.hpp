#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace accelwave {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

/// Comma-separated rows, LF line endings, "#"-prefixed footer lines.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& columns) { write_fields(columns); }

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::vector<std::string> cells{cell(fields)...};
    write_fields(cells);
  }

  void footer(std::string_view text) { out_ << "# " << text << '\n'; }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  void write_fields(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ostream& out_;
};

}  // namespace accelwave
