#include "readout/waveform.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "readout/csvio.hpp"

namespace readout {

void DriveWaveform::validate() const {
    if (!(dt_ns > 0.0)) {
        throw std::invalid_argument("waveform: dt_ns must be positive");
    }
    if (samples.empty()) {
        throw std::invalid_argument("waveform: no samples");
    }
    for (double v : samples) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("waveform: non-finite sample");
        }
    }
}

DriveWaveform read_waveform(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open waveform file: " + path);
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw std::runtime_error("empty waveform file: " + path);
    }
    double dt = 0.0;
    if (std::sscanf(header.c_str(), "# dt_ns=%lf", &dt) != 1) {
        throw std::runtime_error("waveform file missing '# dt_ns=' header: " + path);
    }
    DriveWaveform wave;
    wave.dt_ns = dt;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        double v = 0.0;
        if (!(ls >> v)) {
            throw std::runtime_error("bad amplitude line in " + path + ": '" + line + "'");
        }
        wave.samples.push_back(v);
    }
    wave.validate();
    return wave;
}

void write_waveform(const std::string& path, const DriveWaveform& wave) {
    wave.validate();
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write waveform file: " + path);
    }
    out << "# dt_ns=" << fmt_g17(wave.dt_ns) << "\n";
    for (double v : wave.samples) {
        out << fmt_g17(v) << "\n";
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace readout
