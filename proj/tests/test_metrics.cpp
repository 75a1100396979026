#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "readout/device.hpp"
#include "readout/langevin.hpp"
#include "readout/metrics.hpp"
#include "readout/transform.hpp"

using namespace readout;

TEST_CASE("snr fidelity hits tabulated erf points") {
    const std::vector<double> s = {0.0, 1.0, 2.0};
    const auto f = snr_fidelity(s, 1.0);
    CHECK(f[0] == doctest::Approx(0.5));
    CHECK(f[1] == doctest::Approx(0.5 * (1.0 + std::erf(1.0))).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(0.92135).epsilon(1e-5));
    CHECK(f[2] == doctest::Approx(0.5 * (1.0 + std::erf(2.0))).epsilon(1e-15));
    CHECK(f[2] == doctest::Approx(0.99766).epsilon(1e-4));
}

TEST_CASE("qubit fidelity integrates the photon load") {
    // Constant n = 2 for 1000 ns: exponent = gamma0*t + gamma_p*2*t, t = 1 us.
    const std::vector<double> t = {0.0, 500.0, 1000.0};
    const std::vector<double> n = {2.0, 2.0, 2.0};
    const auto fq = qubit_fidelity(t, n, 0.01, 0.03);
    CHECK(fq[0] == doctest::Approx(1.0));
    CHECK(fq[2] == doctest::Approx(std::exp(-0.01 - 0.03 * 2.0)).epsilon(1e-12));

    // No decay channels: identically one.
    const auto flat = qubit_fidelity(t, n, 0.0, 0.0);
    for (const double v : flat) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("extrema selection: earliest peak, first photon dip after it") {
    SUBCASE("plain case") {
        const std::vector<double> f = {0.5, 0.7, 0.9, 0.9, 0.6};
        const std::vector<double> n = {0.0, 4.0, 6.0, 2.0, 3.0};
        const ExtremaIndices e = locate_extrema(f, n);
        CHECK(e.i_f_max == 2);  // earliest of the tied peaks
        CHECK(e.i_min_n == 3);  // strict local minimum after the peak
    }
    SUBCASE("photon minimum before the peak does not count") {
        const std::vector<double> f = {0.5, 0.6, 0.7, 0.95, 0.8};
        const std::vector<double> n = {5.0, 1.0, 4.0, 4.5, 5.0};
        const ExtremaIndices e = locate_extrema(f, n);
        CHECK(e.i_f_max == 3);
        CHECK(e.i_min_n == 4);  // none after the peak -> last grid point
    }
    SUBCASE("monotone decay has no strict minimum") {
        const std::vector<double> f = {0.5, 0.9, 0.6, 0.6};
        const std::vector<double> n = {6.0, 4.0, 2.0, 1.0};
        const ExtremaIndices e = locate_extrema(f, n);
        CHECK(e.i_min_n == 3);
    }
    SUBCASE("flat photon valley is not strict") {
        const std::vector<double> f = {0.9, 0.5, 0.5, 0.5, 0.5};
        const std::vector<double> n = {5.0, 3.0, 3.0, 3.0, 4.0};
        const ExtremaIndices e = locate_extrema(f, n);
        CHECK(e.i_f_max == 0);
        CHECK(e.i_min_n == 4);
    }
}

TEST_CASE("reset time formula and clamp") {
    DeviceParams dev = preset("brisbane");
    // 0.6 leftover photons against the 0.05 threshold: ratio 12.
    const double expected = 400.0 + (8.0 / 21.4) * std::log(12.0) * 1e3;
    CHECK(reset_time(400.0, 0.6, dev) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(reset_time(400.0, 0.6, dev) == doctest::Approx(1329.0).epsilon(1e-3));

    // Already below threshold: no tail is added, never a negative one.
    CHECK(reset_time(400.0, 0.01, dev) == doctest::Approx(400.0));
    CHECK(reset_time(400.0, 0.05, dev) == doctest::Approx(400.0));

    // The modeled tail length is linear in m.
    const double tail8 = reset_time(0.0, 0.6, dev, 8.0);
    const double tail16 = reset_time(0.0, 0.6, dev, 16.0);
    CHECK(tail16 == doctest::Approx(2.0 * tail8).epsilon(1e-12));
}

TEST_CASE("square-pulse metrics on the kyoto preset") {
    const DeviceParams dev = preset("kyoto");
    const DriveWaveform square = to_physical(std::vector<double>(kActionSamples, 1.0), dev);
    const ReadoutMetrics m = compute_metrics(integrate(dev, square), dev);

    CHECK(m.f_max == doctest::Approx(0.995).epsilon(2e-4));
    CHECK(m.t_f_max_ns == doctest::Approx(517.5).epsilon(0.02));
    // No photon dip while driven: measurement end falls on the final grid point.
    CHECK(m.t_min_n_ns == doctest::Approx(726.0));
    CHECK(m.n_max == doctest::Approx(26.43).epsilon(1e-3));
    CHECK(m.n_residual == doctest::Approx(26.04).epsilon(1e-3));
    CHECK(m.tau_r_ns == doctest::Approx(5537.8).epsilon(1e-3));
    CHECK(m.m == 8.0);
    CHECK(m.f_max_complement == doctest::Approx(1.0 - m.f_max).epsilon(1e-9));
}

TEST_CASE("zero drive keeps fidelity at chance") {
    const DeviceParams dev = preset("kyoto");
    const DriveWaveform zero(1.5, std::vector<double>(100, 0.0));
    const ReadoutMetrics m = compute_metrics(integrate(dev, zero), dev);
    CHECK(m.f_max == doctest::Approx(0.5));
    CHECK(m.n_max == 0.0);
    CHECK(m.tau_r_ns == doctest::Approx(m.t_min_n_ns));
}

TEST_CASE("metrics csv round shape") {
    const ReadoutMetrics m;
    CHECK(metrics_csv_header() == "f_max,t_f_max,t_min_n,n_max,n_residual,tau_r,m");
    const std::string row = metrics_csv_row(m);
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
}
