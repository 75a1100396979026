#pragma once

#include <string>
#include <vector>

namespace readout {

// Time-discretized real drive waveform. Samples are zero-order-hold values,
// each held for dt_ns. Units are either dimensionless (raw agent action) or
// physical drive amplitude in 1/us (after the pulse transform).
struct DriveWaveform {
    double dt_ns = 6.0;
    std::vector<double> samples;

    DriveWaveform() = default;
    DriveWaveform(double dt, std::vector<double> s) : dt_ns(dt), samples(std::move(s)) {
        validate();
    }

    double duration_ns() const { return dt_ns * static_cast<double>(samples.size()); }
    std::size_t size() const { return samples.size(); }

    // Throws std::invalid_argument if dt <= 0, samples empty, or any sample non-finite.
    void validate() const;
};

// Pulse file format: first line "# dt_ns=<value>", then one amplitude per line.
DriveWaveform read_waveform(const std::string& path);
void write_waveform(const std::string& path, const DriveWaveform& wave);

}  // namespace readout
