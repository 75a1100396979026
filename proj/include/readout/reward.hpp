#pragma once

#include <vector>

#include "readout/device.hpp"
#include "readout/metrics.hpp"

namespace readout {

// Weights of the scalar pulse-quality objective. n_cap defaults to the
// device's n0 when constructed through for_device().
struct RewardConfig {
    double k1 = 10.0;   // fidelity: -k1 * log10(1 - f_max)
    double k2 = 2.0;    // duration: -k2 * kappa * tau_r
    double k3 = 1.0;    // smoothness: -k3 * sum((d2A/dt2)^2) dt, A in steady-state units, t in ns
    double k4 = 100.0;  // terminal amplitudes: -k4 * (|A(0)| + |A(t_min_n)|) / A0
    double k5 = 100.0;  // photon cap: -k5 * max(0, n_max - n_cap)
    double k6 = 100.0;  // ordering: -k6 when the fidelity peak comes after the photon minimum
    double n_cap = 26.0;
    double failure_reward = -1e6;

    static RewardConfig for_device(const DeviceParams& params);
};

// Individual penalty terms (each <= 0 except fidelity_term which can have
// either sign) plus their sum and the metrics they were derived from.
struct RewardBreakdown {
    double fidelity_term = 0.0;
    double time_term = 0.0;
    double smoothness_term = 0.0;
    double terminal_term = 0.0;
    double photon_term = 0.0;
    double order_term = 0.0;
    double total = 0.0;
    bool failed = false;
    ReadoutMetrics metrics;
};

// Full episode evaluation: action -> physical drive -> trajectory -> metrics
// -> reward. A simulation blow-up is caught and mapped to failure_reward.
RewardBreakdown evaluate_action(const std::vector<double>& action, const DeviceParams& params,
                                const RewardConfig& config);

}  // namespace readout
