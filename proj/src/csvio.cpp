#include "readout/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace readout {

std::string fmt_g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            row += ',';
        }
        row += fmt_g17(values[i]);
    }
    return row;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    for (const auto& line : lines) {
        out << line << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace readout
