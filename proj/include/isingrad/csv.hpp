#pragma once

// Deterministic CSV output: '.' decimal separator, '\n' line endings and
// 17 significant digits so every double round-trips exactly.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace isingrad {

std::string format_double(double value);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  template <class... Fields>
  void row(const Fields&... fields) {
    std::string line;
    bool first = true;
    ((append(line, fields, first)), ...);
    write_line(line);
  }

  void row(const std::vector<double>& fields);

 private:
  template <class T>
  static void append(std::string& line, const T& value, bool& first) {
    if (!first) line += ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>) {
      line += format_double(static_cast<double>(value));
    } else if constexpr (std::is_integral_v<T>) {
      line += std::to_string(value);
    } else {
      line += std::string_view(value);
    }
  }

  void write_line(const std::string& line);

  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace isingrad
