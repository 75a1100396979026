#pragma once

#include <vector>

#include "readout/device.hpp"
#include "readout/waveform.hpp"

namespace readout {

// Raw agent pulses are 121 samples of 6 ns; physics runs on a 1.5 ns grid.
inline constexpr int kActionSamples = 121;
inline constexpr double kActionDtNs = 6.0;
inline constexpr double kPhysicalDtNs = 1.5;

// Gaussian std-dev (ns) matching a 50 MHz full-width-half-maximum bandwidth
// cutoff of the drive line: sigma_t = sqrt(2 ln 2) / (2 pi f_c).
double default_smoothing_sigma_ns();

// Reference amplitude: constant drive A0 whose steady state holds n0 photons,
// A0 = 0.5 * sqrt(n0 * (kappa^2 + 4 chi^2)).
double steady_state_amplitude(const DeviceParams& params);

// Element-wise clamp of samples to [-bound, bound]; bound must be > 0.
DriveWaveform clip(DriveWaveform wave, double bound);

// Convolution with a truncated (+-4 sigma), renormalized Gaussian kernel on the
// waveform's own grid. Input treated as zero outside its support; the output
// keeps the grid and sample count. sigma_ns <= 0 returns the input unchanged.
DriveWaveform gaussian_smooth(const DriveWaveform& wave, double sigma_ns);

// Full action-to-drive pipeline: clip to +-mu, resample onto the 1.5 ns grid
// (zero-order hold), bandwidth-limit, scale by the reference amplitude A0.
DriveWaveform to_physical(const std::vector<double>& action, const DeviceParams& params);
DriveWaveform to_physical(const DriveWaveform& raw, const DeviceParams& params);

}  // namespace readout
