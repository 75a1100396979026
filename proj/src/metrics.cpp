#include "readout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "readout/csvio.hpp"

namespace readout {

std::vector<double> snr_fidelity(const std::vector<double>& s, double lambda) {
    std::vector<double> f(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        f[i] = 0.5 * (1.0 + std::erf(lambda * s[i]));
    }
    return f;
}

std::vector<double> qubit_fidelity(const std::vector<double>& t_ns, const std::vector<double>& n,
                                   double gamma0, double gamma_p) {
    if (t_ns.size() != n.size()) {
        throw std::invalid_argument("qubit_fidelity: grid/photon size mismatch");
    }
    std::vector<double> fq(t_ns.size());
    double integral = 0.0;  // trapezoidal integral of n over time (us)
    fq[0] = 1.0;
    for (std::size_t i = 1; i < t_ns.size(); ++i) {
        const double dt_us = (t_ns[i] - t_ns[i - 1]) * 1e-3;
        integral += 0.5 * (n[i] + n[i - 1]) * dt_us;
        fq[i] = std::exp(-gamma0 * t_ns[i] * 1e-3 - gamma_p * integral);
    }
    return fq;
}

std::vector<double> assignment_fidelity(const std::vector<double>& t_ns,
                                        const std::vector<double>& s,
                                        const std::vector<double>& n,
                                        const DeviceParams& params) {
    if (t_ns.size() != s.size() || t_ns.size() != n.size()) {
        throw std::invalid_argument("assignment_fidelity: input size mismatch");
    }
    const auto fq = qubit_fidelity(t_ns, n, params.gamma0, params.gamma_p);
    std::vector<double> f(t_ns.size());
    for (std::size_t i = 0; i < t_ns.size(); ++i) {
        f[i] = 0.5 * (1.0 + std::erf(params.f0 * params.lambda_snr * s[i] * fq[i]));
    }
    return f;
}

ExtremaIndices locate_extrema(const std::vector<double>& f, const std::vector<double>& n) {
    if (f.empty() || f.size() != n.size()) {
        throw std::invalid_argument("locate_extrema: bad input sizes");
    }
    ExtremaIndices out;
    out.i_f_max = 0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (f[i] > f[out.i_f_max]) {
            out.i_f_max = i;
        }
    }
    // First strict local photon minimum at or after the fidelity peak; the
    // final point is the fallback when the tail is monotone.
    out.i_min_n = n.size() - 1;
    for (std::size_t i = std::max<std::size_t>(out.i_f_max, 1); i + 1 < n.size(); ++i) {
        if (n[i] < n[i - 1] && n[i] < n[i + 1]) {
            out.i_min_n = i;
            break;
        }
    }
    return out;
}

double reset_time(double t_min_n_ns, double n_at_min, const DeviceParams& params, double m) {
    if (n_at_min <= 0.0) {
        return t_min_n_ns;
    }
    const double tail_us = (m / params.kappa) * std::log(n_at_min / params.n_target);
    return t_min_n_ns + std::max(0.0, tail_us * 1e3);
}

ReadoutMetrics compute_metrics(const Trajectory& traj, const DeviceParams& params, double m) {
    const auto n = photon_number(traj);
    const auto s = separation(traj);
    const auto fq = qubit_fidelity(traj.t_ns, n, params.gamma0, params.gamma_p);
    std::vector<double> f(traj.size());
    std::vector<double> z(traj.size());  // erf arguments, kept for the complement
    for (std::size_t i = 0; i < traj.size(); ++i) {
        z[i] = params.f0 * params.lambda_snr * s[i] * fq[i];
        f[i] = 0.5 * (1.0 + std::erf(z[i]));
    }
    const auto ext = locate_extrema(f, n);

    ReadoutMetrics out;
    out.m = m;
    out.f_max = f[ext.i_f_max];
    out.f_max_complement = 0.5 * std::erfc(z[ext.i_f_max]);
    out.t_f_max_ns = traj.t_ns[ext.i_f_max];
    out.t_min_n_ns = traj.t_ns[ext.i_min_n];
    out.n_max = *std::max_element(n.begin(), n.end());
    out.n_residual = n[ext.i_min_n];
    out.tau_r_ns = reset_time(out.t_min_n_ns, out.n_residual, params, m);
    return out;
}

std::string metrics_csv_header() {
    return "f_max,t_f_max,t_min_n,n_max,n_residual,tau_r,m";
}

std::string metrics_csv_row(const ReadoutMetrics& metrics) {
    return csv_row({metrics.f_max, metrics.t_f_max_ns, metrics.t_min_n_ns, metrics.n_max,
                    metrics.n_residual, metrics.tau_r_ns, metrics.m});
}

}  // namespace readout
