#pragma once

#include <complex>
#include <string>
#include <vector>

#include "readout/device.hpp"
#include "readout/waveform.hpp"

namespace readout {

using cplx = std::complex<double>;

// Coherent resonator amplitudes for qubit ground/excited state on a shared
// time grid (t_ns[0] = 0 is the initial condition, one point per substep end).
struct Trajectory {
    std::vector<double> t_ns;
    std::vector<cplx> alpha_g;
    std::vector<cplx> alpha_e;

    std::size_t size() const { return t_ns.size(); }
};

// Integrates d(alpha_{g,e})/dt = -(kappa/2 -+ i chi) alpha - i A(t) with classical
// fourth-order Runge-Kutta steps. The drive is held constant across each
// sample; substeps per sample = max(1, round(dt_ns / 1.5)). Throws
// std::runtime_error if the state leaves a sanity bound (|alpha|^2 > 1e8).
Trajectory integrate(const DeviceParams& params, const DriveWaveform& drive,
                     cplx alpha_g0 = {0.0, 0.0}, cplx alpha_e0 = {0.0, 0.0});

// Exact piecewise solution on the same grid, usable as an accuracy reference:
// over a constant-drive interval, alpha(t0+s) = (alpha0 + iA/g) e^{-g s} - iA/g.
Trajectory analytic_piecewise(const DeviceParams& params, const DriveWaveform& drive,
                              cplx alpha_g0 = {0.0, 0.0}, cplx alpha_e0 = {0.0, 0.0});

// Pointwise max(|alpha_g|^2, |alpha_e|^2) — the photon load seen by the qubit.
std::vector<double> photon_number(const Trajectory& traj);

// Pointwise |alpha_g - alpha_e|; for real drives from zero this is 2|Re alpha_g|.
std::vector<double> separation(const Trajectory& traj);

// Columns: t_ns,re_ag,im_ag,re_ae,im_ae,n,s with %.17g values.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace readout
