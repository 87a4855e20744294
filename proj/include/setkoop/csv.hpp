#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace setkoop {

/// Shortest round-trip decimal representation, locale independent.
std::string format_number(double value);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);
void write_csv_row(std::ostream& out, const std::vector<double>& cells);

}  // namespace setkoop
