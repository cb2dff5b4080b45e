#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>

namespace foucault {

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

void write_csv_row(std::ostream& os, std::initializer_list<double> values);
void write_csv_row(std::ostream& os, std::span<const double> values);

}  // namespace foucault
