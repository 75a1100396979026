#include "readout/reward.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "readout/langevin.hpp"
#include "readout/transform.hpp"

namespace readout {

RewardConfig RewardConfig::for_device(const DeviceParams& params) {
    RewardConfig config;
    config.n_cap = params.n0;
    return config;
}

namespace {

// Integral of the squared second difference over the waveform's own grid,
// amplitude in units of `scale`, time in ns:
// sum ((A[i+1]-2A[i]+A[i-1])/(scale dt^2))^2 * dt.
double curvature_integral(const DriveWaveform& wave, double scale) {
    const double dt = wave.dt_ns;
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < wave.samples.size(); ++i) {
        const double d2 = (wave.samples[i + 1] - 2.0 * wave.samples[i] + wave.samples[i - 1]) /
                          (scale * dt * dt);
        acc += d2 * d2;
    }
    return acc * dt;
}

}  // namespace

RewardBreakdown evaluate_action(const std::vector<double>& action, const DeviceParams& params,
                                const RewardConfig& config) {
    RewardBreakdown out;
    try {
        const DriveWaveform drive = to_physical(action, params);
        const Trajectory traj = integrate(params, drive);
        out.metrics = compute_metrics(traj, params);

        const double one_minus_f = std::max(out.metrics.f_max_complement, 1e-300);
        out.fidelity_term = -config.k1 * std::log10(one_minus_f);
        out.time_term = -config.k2 * params.kappa * out.metrics.tau_r_ns * 1e-3;

        // Amplitude penalties measure the waveform in units of the reference
        // steady-state amplitude, keeping every term at a comparable scale.
        const double a0 = steady_state_amplitude(params);
        out.smoothness_term = -config.k3 * curvature_integral(drive, a0);

        // Drive amplitude at the start and at the measurement end point.
        const std::size_t i_end = std::min(
            static_cast<std::size_t>(std::llround(out.metrics.t_min_n_ns / drive.dt_ns)),
            drive.samples.size() - 1);
        out.terminal_term = -config.k4 *
                            (std::abs(drive.samples.front()) + std::abs(drive.samples[i_end])) /
                            a0;
        out.photon_term = -config.k5 * std::max(0.0, out.metrics.n_max - config.n_cap);
        out.order_term =
            out.metrics.t_f_max_ns > out.metrics.t_min_n_ns ? -config.k6 : 0.0;
        out.total = out.fidelity_term + out.time_term + out.smoothness_term + out.terminal_term +
                    out.photon_term + out.order_term;
        out.failed = false;
    } catch (const std::exception&) {
        out = RewardBreakdown{};
        out.failed = true;
        out.total = config.failure_reward;
    }
    return out;
}

}  // namespace readout
