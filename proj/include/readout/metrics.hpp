#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "readout/device.hpp"
#include "readout/langevin.hpp"

namespace readout {

// Scalar readout figures extracted from one simulated trajectory.
struct ReadoutMetrics {
    double f_max = 0.0;       // peak assignment fidelity
    double t_f_max_ns = 0.0;  // time of that peak (earliest on ties)
    double t_min_n_ns = 0.0;  // end-of-measurement time (first photon minimum after the peak)
    double n_max = 0.0;       // peak photon number over the trajectory
    double n_residual = 0.0;  // photon number at t_min_n
    double tau_r_ns = 0.0;    // total duration including the modeled ring-down tail
    double m = 8.0;           // ring-down amplification factor used for tau_r
    // 1 - f_max evaluated through erfc so it stays positive after f_max
    // rounds to 1.0 in double precision. Not part of the CSV row.
    double f_max_complement = 1.0;
};

// 0.5 * (1 + erf(lambda * s)) per grid point.
std::vector<double> snr_fidelity(const std::vector<double>& s, double lambda);

// exp(-gamma0 t - gamma_p * integral_0^t n dtau), trapezoidal integral, t in us.
std::vector<double> qubit_fidelity(const std::vector<double>& t_ns, const std::vector<double>& n,
                                   double gamma0, double gamma_p);

// Combined: 0.5 * (1 + erf(f0 * lambda * s(t) * f_q(t))).
std::vector<double> assignment_fidelity(const std::vector<double>& t_ns,
                                        const std::vector<double>& s,
                                        const std::vector<double>& n,
                                        const DeviceParams& params);

// Index of the fidelity peak (earliest on exact ties) and of the first strict
// local photon minimum at or after it (falls back to the last grid point).
struct ExtremaIndices {
    std::size_t i_f_max = 0;
    std::size_t i_min_n = 0;
};
ExtremaIndices locate_extrema(const std::vector<double>& f, const std::vector<double>& n);

// t_min_n + (m / kappa) * ln(n_at_min / n_target), clamped below at t_min_n —
// the time for an m-fold slowed ring-down to drain the leftover photons.
double reset_time(double t_min_n_ns, double n_at_min, const DeviceParams& params, double m = 8.0);

ReadoutMetrics compute_metrics(const Trajectory& traj, const DeviceParams& params, double m = 8.0);

// One header + one row, field order matching ReadoutMetrics.
std::string metrics_csv_header();
std::string metrics_csv_row(const ReadoutMetrics& metrics);

}  // namespace readout
