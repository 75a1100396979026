#include "readout/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace readout {

double default_smoothing_sigma_ns() {
    // 50 MHz FWHM bandwidth -> time-domain sigma = sqrt(2 ln 2) / (2 pi f_c).
    constexpr double f_cut_per_ns = 0.05;
    return std::sqrt(2.0 * std::log(2.0)) / (2.0 * M_PI * f_cut_per_ns);
}

double steady_state_amplitude(const DeviceParams& params) {
    return 0.5 * std::sqrt(params.n0 * (params.kappa * params.kappa + 4.0 * params.chi * params.chi));
}

DriveWaveform clip(DriveWaveform wave, double bound) {
    if (!(bound > 0.0)) {
        throw std::invalid_argument("clip: bound must be positive");
    }
    wave.validate();
    for (double& v : wave.samples) {
        v = std::clamp(v, -bound, bound);
    }
    return wave;
}

DriveWaveform gaussian_smooth(const DriveWaveform& wave, double sigma_ns) {
    wave.validate();
    if (sigma_ns <= 0.0) {
        return wave;
    }
    const int radius = static_cast<int>(std::ceil(4.0 * sigma_ns / wave.dt_ns));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double t = k * wave.dt_ns;
        kernel[k + radius] = std::exp(-0.5 * t * t / (sigma_ns * sigma_ns));
        norm += kernel[k + radius];
    }
    for (double& w : kernel) {
        w /= norm;
    }

    const int n = static_cast<int>(wave.samples.size());
    DriveWaveform out;
    out.dt_ns = wave.dt_ns;
    out.samples.assign(wave.samples.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        const int klo = std::max(-radius, i - (n - 1));
        const int khi = std::min(radius, i);
        for (int k = klo; k <= khi; ++k) {
            acc += kernel[k + radius] * wave.samples[i - k];
        }
        out.samples[i] = acc;
    }
    return out;
}

DriveWaveform to_physical(const DriveWaveform& raw, const DeviceParams& params) {
    DriveWaveform clipped = clip(raw, params.mu);
    // Zero-order-hold resample onto the fine simulation grid.
    const int factor = std::max(1, static_cast<int>(std::lround(clipped.dt_ns / kPhysicalDtNs)));
    DriveWaveform fine;
    fine.dt_ns = clipped.dt_ns / factor;
    fine.samples.reserve(clipped.samples.size() * static_cast<std::size_t>(factor));
    for (double v : clipped.samples) {
        for (int r = 0; r < factor; ++r) {
            fine.samples.push_back(v);
        }
    }
    DriveWaveform smooth = gaussian_smooth(fine, default_smoothing_sigma_ns());
    const double a0 = steady_state_amplitude(params);
    for (double& v : smooth.samples) {
        v *= a0;
    }
    return smooth;
}

DriveWaveform to_physical(const std::vector<double>& action, const DeviceParams& params) {
    return to_physical(DriveWaveform(kActionDtNs, action), params);
}

}  // namespace readout
