#include "isingrad/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "isingrad/errors.hpp"

namespace isingrad {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  // snprintf is locale-sensitive only through LC_NUMERIC, which the C++
  // runtime leaves at "C" unless a program changes it.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) line += ',';
    line += header[i];
  }
  write_line(line);
}

void CsvWriter::row(const std::vector<double>& fields) {
  if (fields.size() != columns_) throw ArgumentError("CSV row width mismatch");
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += format_double(fields[i]);
  }
  write_line(line);
}

void CsvWriter::write_line(const std::string& line) {
  out_ << line << '\n';
}

}  // namespace isingrad
