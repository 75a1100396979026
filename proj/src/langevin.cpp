#include "readout/langevin.hpp"

#include <cmath>
#include <stdexcept>

#include "readout/csvio.hpp"
#include "readout/transform.hpp"

namespace readout {

namespace {

constexpr double kBlowupBound = 1e8;  // |alpha|^2 sanity ceiling

int substeps_per_sample(double dt_ns) {
    return std::max(1, static_cast<int>(std::lround(dt_ns / kPhysicalDtNs)));
}

}  // namespace

Trajectory integrate(const DeviceParams& params, const DriveWaveform& drive, cplx alpha_g0,
                     cplx alpha_e0) {
    drive.validate();
    const int n_sub = substeps_per_sample(drive.dt_ns);
    const double h_ns = drive.dt_ns / n_sub;
    const double h = h_ns * 1e-3;  // integrate in us to match the rate units

    const double kg_r = 0.5 * params.kappa, kg_i = -params.chi;  // gamma_g
    const double ke_r = 0.5 * params.kappa, ke_i = params.chi;   // gamma_e

    Trajectory traj;
    const std::size_t n_points = drive.samples.size() * static_cast<std::size_t>(n_sub) + 1;
    traj.t_ns.reserve(n_points);
    traj.alpha_g.reserve(n_points);
    traj.alpha_e.reserve(n_points);

    double gr = alpha_g0.real(), gi = alpha_g0.imag();
    double er = alpha_e0.real(), ei = alpha_e0.imag();
    traj.t_ns.push_back(0.0);
    traj.alpha_g.emplace_back(gr, gi);
    traj.alpha_e.emplace_back(er, ei);

    std::size_t step_index = 0;
    for (std::size_t s = 0; s < drive.samples.size(); ++s) {
        const double a = drive.samples[s];
        for (int sub = 0; sub < n_sub; ++sub) {
            // One classical RK4 step of d(alpha)/dt = -gamma*alpha - iA for
            // both qubit branches, with the complex algebra written out.
            auto rk4 = [h, a](double cr, double ci, double& xr, double& xi) {
                const double k1r = -(cr * xr - ci * xi);
                const double k1i = -(cr * xi + ci * xr) - a;
                double yr = xr + 0.5 * h * k1r, yi = xi + 0.5 * h * k1i;
                const double k2r = -(cr * yr - ci * yi);
                const double k2i = -(cr * yi + ci * yr) - a;
                yr = xr + 0.5 * h * k2r;
                yi = xi + 0.5 * h * k2i;
                const double k3r = -(cr * yr - ci * yi);
                const double k3i = -(cr * yi + ci * yr) - a;
                yr = xr + h * k3r;
                yi = xi + h * k3i;
                const double k4r = -(cr * yr - ci * yi);
                const double k4i = -(cr * yi + ci * yr) - a;
                xr += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
                xi += h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
            };
            rk4(kg_r, kg_i, gr, gi);
            rk4(ke_r, ke_i, er, ei);
            ++step_index;
            traj.t_ns.push_back(static_cast<double>(step_index) * h_ns);
            traj.alpha_g.emplace_back(gr, gi);
            traj.alpha_e.emplace_back(er, ei);
            if (gr * gr + gi * gi > kBlowupBound || er * er + ei * ei > kBlowupBound) {
                throw std::runtime_error("langevin: state diverged (photon number > 1e8)");
            }
        }
    }
    return traj;
}

Trajectory analytic_piecewise(const DeviceParams& params, const DriveWaveform& drive,
                              cplx alpha_g0, cplx alpha_e0) {
    drive.validate();
    const int n_sub = substeps_per_sample(drive.dt_ns);
    const double h_ns = drive.dt_ns / n_sub;
    const double h = h_ns * 1e-3;

    const cplx gamma_g(0.5 * params.kappa, -params.chi);
    const cplx gamma_e(0.5 * params.kappa, params.chi);
    const cplx decay_g = std::exp(-gamma_g * h);
    const cplx decay_e = std::exp(-gamma_e * h);

    Trajectory traj;
    const std::size_t n_points = drive.samples.size() * static_cast<std::size_t>(n_sub) + 1;
    traj.t_ns.reserve(n_points);
    traj.alpha_g.reserve(n_points);
    traj.alpha_e.reserve(n_points);

    cplx ag = alpha_g0, ae = alpha_e0;
    traj.t_ns.push_back(0.0);
    traj.alpha_g.push_back(ag);
    traj.alpha_e.push_back(ae);

    const cplx iunit(0.0, 1.0);
    std::size_t step_index = 0;
    for (std::size_t s = 0; s < drive.samples.size(); ++s) {
        // Constant drive: alpha(t0+s) = (alpha0 + iA/gamma) e^{-gamma s} - iA/gamma.
        const cplx off_g = iunit * drive.samples[s] / gamma_g;
        const cplx off_e = iunit * drive.samples[s] / gamma_e;
        for (int sub = 0; sub < n_sub; ++sub) {
            ag = (ag + off_g) * decay_g - off_g;
            ae = (ae + off_e) * decay_e - off_e;
            ++step_index;
            traj.t_ns.push_back(static_cast<double>(step_index) * h_ns);
            traj.alpha_g.push_back(ag);
            traj.alpha_e.push_back(ae);
        }
    }
    return traj;
}

std::vector<double> photon_number(const Trajectory& traj) {
    std::vector<double> n(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        n[i] = std::max(std::norm(traj.alpha_g[i]), std::norm(traj.alpha_e[i]));
    }
    return n;
}

std::vector<double> separation(const Trajectory& traj) {
    std::vector<double> s(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        s[i] = std::abs(traj.alpha_g[i] - traj.alpha_e[i]);
    }
    return s;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    const auto n = photon_number(traj);
    const auto s = separation(traj);
    std::vector<std::string> lines;
    lines.reserve(traj.size() + 1);
    lines.emplace_back("t_ns,re_ag,im_ag,re_ae,im_ae,n,s");
    for (std::size_t i = 0; i < traj.size(); ++i) {
        lines.push_back(csv_row({traj.t_ns[i], traj.alpha_g[i].real(), traj.alpha_g[i].imag(),
                                 traj.alpha_e[i].real(), traj.alpha_e[i].imag(), n[i], s[i]}));
    }
    write_lines(path, lines);
}

}  // namespace readout
