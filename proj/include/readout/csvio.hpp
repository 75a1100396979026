#pragma once

#include <string>
#include <vector>

namespace readout {

// Shortest round-trippable decimal form of a double ("%.17g").
std::string fmt_g17(double value);

// Comma-joined row of %.17g values.
std::string csv_row(const std::vector<double>& values);

// Writes lines verbatim, appending '\n' to each; throws on I/O failure.
void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace readout
