#include "foucault/io.hpp"

#include <cstdio>
#include <ostream>

namespace foucault {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_row(std::ostream& os, std::span<const double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_double(v);
    first = false;
  }
  os << '\n';
}

void write_csv_row(std::ostream& os, std::initializer_list<double> values) {
  write_csv_row(os, std::span<const double>(values.begin(), values.size()));
}

}  // namespace foucault
