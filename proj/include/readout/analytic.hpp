#pragma once

#include <limits>

#include "readout/device.hpp"
#include "readout/metrics.hpp"
#include "readout/waveform.hpp"

namespace readout {

// Ring-up time for a drive overshooting by factor mu: tau1 = (2/kappa) ln(mu/(mu-1)).
double a4r_tau1_ns(double mu, double kappa);
// Active-reset time draining a full resonator at overshoot mu: tau3 = (2/kappa) ln((mu+1)/mu).
double a4r_tau3_ns(double mu, double kappa);

// Four-segment analytic pulse: ring-up, hold, active reset, kickback, plus an
// optional idle settle tail. Amplitudes in 1/us, durations in ns.
struct A4RParams {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    double tau1_ns = 0.0, tau2_ns = 0.0, tau3_ns = 0.0, tau4_ns = 0.0;
    double settle_ns = 0.0;

    double total_ns() const { return tau1_ns + tau2_ns + tau3_ns + tau4_ns + settle_ns; }
};

// Renders the segments onto the 6 ns grid (durations rounded to whole
// samples) and runs them through the same bandwidth-limiting transform as
// agent pulses. The waveform ends with the pulse; no trailing window.
DriveWaveform build_a4r(const A4RParams& params, const DeviceParams& device,
                        double max_total_ns = 16000.0);

struct A4ROptions {
    double settle_target_fraction = 0.4;  // idle tail aims at this fraction of n_target
    double max_settle_ns = 2000.0;
    double max_tau2_ns = 2000.0;
    double kickback_max_ns = 100.0;
    // The reset fit scores candidates on reset time under +-drift_fraction
    // detuning corners as well as at the nominal point, so the chosen pulse
    // keeps its timing when the device drifts.
    double drift_fraction = 0.1;
    double robust_weight = 1.0;
};

// Device-specific fit of the four segments:
//  1. a1 = mu*A0 with tau1 swept around its closed-form seed to best match
//     the photon target n0;
//  2. a2 = A0 with tau2 chosen to maximize simulated assignment fidelity;
//  3. a3 = -mu*A0 with tau3 seeded by its closed form and locally refined;
//  4. (a4, tau4) fitted by a two-parameter simplex search minimizing the
//     leftover photons, with an idle settle tail sized from what remains.
// Throws CalibrationError if the residual photon number stays above n_target.
A4RParams calibrate_a4r(const DeviceParams& device, const A4ROptions& options = {});

// Two-segment ring-up, square hold, two-segment reset pulse (per-segment
// amplitudes free, the two halves of each ramp equal in duration).
struct ClearParams {
    double c1 = 0.0, c2 = 0.0;      // ring-up amplitudes, 1/us
    double ring_ns = 0.0;           // total ring-up duration (two equal halves)
    double a_hold = 0.0;            // readout amplitude
    double hold_ns = 0.0;           // truncated at the fidelity peak
    double c3 = 0.0, c4 = 0.0;      // reset amplitudes
    double reset_ns = 0.0;          // total reset duration (two equal halves)
    double settle_ns = 0.0;
    bool converged = false;

    double total_ns() const { return ring_ns + hold_ns + reset_ns + settle_ns; }
};

DriveWaveform build_clear(const ClearParams& params, const DeviceParams& device,
                          double max_total_ns = 16000.0);

struct ClearOptions {
    double duration_grid_min_ns = 20.0;
    double duration_grid_max_ns = 200.0;
    double duration_grid_step_ns = 20.0;
    double settle_target_fraction = 0.4;
    double max_settle_ns = 2000.0;
    // Amplitude search bound in units of the steady-state amplitude; NaN
    // means "use the device overshoot factor mu". A non-positive bound makes
    // the search infeasible and yields a flagged, unconverged result.
    double amplitude_bound_mu = std::numeric_limits<double>::quiet_NaN();
    int inner_max_iterations = 240;
    // Idle-tail sizing checks the same +-drift corners the four-tone fit uses,
    // so the two pulse families report comparable total durations.
    double drift_fraction = 0.1;
};

// Grid over the ramp durations with an inner four-amplitude simplex search;
// the hold duration is set afterwards by truncating at the fidelity peak.
ClearParams optimize_clear(const DeviceParams& device, const ClearOptions& options = {});

// Device for the linewidth-to-shift ratio study: chi fixed at the kyoto
// value, kappa = ratio * chi, decay model refitted per point.
DeviceParams ratio_study_device(double kappa_over_chi);

// Device at drifted rates kappa*kappa_scale, chi*chi_scale. The SNR
// normalization follows the drifted rates (the state discriminator is
// recalibrated whenever the device is characterized, like per-configuration
// integration weights); the decay-model constants stay nominal so genuine
// sensitivity still shows up in the landscape.
DeviceParams drifted_device(const DeviceParams& nominal, double kappa_scale, double chi_scale);

// Calibrated-pulse summary used by the sweep and robustness tools.
struct PulseReport {
    ReadoutMetrics metrics;
    double duration_ns = 0.0;  // tau_r of the built pulse
};
PulseReport evaluate_drive(const DriveWaveform& drive, const DeviceParams& device);

}  // namespace readout
