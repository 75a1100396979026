#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "readout/device.hpp"
#include "readout/langevin.hpp"
#include "readout/metrics.hpp"
#include "readout/transform.hpp"

using namespace readout;

namespace {

double steady_separation(const DeviceParams& p) {
    return 4.0 * p.chi * std::sqrt(p.n0) / std::sqrt(p.kappa * p.kappa + 4.0 * p.chi * p.chi);
}

double square_peak_fidelity(const DeviceParams& dev) {
    const DriveWaveform square = to_physical(std::vector<double>(kActionSamples, 1.0), dev);
    const Trajectory traj = integrate(dev, square);
    const auto f = assignment_fidelity(traj.t_ns, separation(traj), photon_number(traj), dev);
    double best = 0.0;
    for (const double v : f) best = std::max(best, v);
    return best;
}

}  // namespace

TEST_CASE("quoted-rate conversion") {
    const auto [kappa, chi] = from_quoted_rates(10.4, 0.425);
    CHECK(kappa == doctest::Approx(10.4));
    CHECK(chi == doctest::Approx(2.0 * M_PI * 0.425).epsilon(1e-15));
    CHECK(chi == doctest::Approx(2.67035).epsilon(1e-5));
    CHECK_THROWS_AS(from_quoted_rates(0.0, 0.425), std::invalid_argument);
    CHECK_THROWS_AS(from_quoted_rates(10.4, -1.0), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    DeviceParams p = preset("kyoto");
    CHECK_NOTHROW(p.validate());
    SUBCASE("kappa") { p.kappa = 0.0; CHECK_THROWS_AS(p.validate(), std::invalid_argument); }
    SUBCASE("chi") { p.chi = -1.0; CHECK_THROWS_AS(p.validate(), std::invalid_argument); }
    SUBCASE("f0") { p.f0 = 1.5; CHECK_THROWS_AS(p.validate(), std::invalid_argument); }
    SUBCASE("mu") { p.mu = 1.0; CHECK_THROWS_AS(p.validate(), std::invalid_argument); }
    SUBCASE("n_target") {
        p.n_target = p.n0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
}

TEST_CASE("kyoto preset") {
    const DeviceParams p = preset("kyoto");
    CHECK(p.kappa == doctest::Approx(10.4));
    CHECK(p.chi == doctest::Approx(2.67035).epsilon(1e-5));
    CHECK(p.n0 == doctest::Approx(26.0));
    CHECK(p.gamma0 == doctest::Approx(1.0 / 344.0));
    CHECK(p.f0 == doctest::Approx(0.999));
    // Fitted decay model, frozen reference values.
    CHECK(p.lambda_snr == doctest::Approx(0.622501).epsilon(1e-5));
    CHECK(p.gamma_p == doctest::Approx(0.0393051).epsilon(1e-4));
}

TEST_CASE("brisbane preset") {
    const DeviceParams p = preset("brisbane");
    CHECK(p.kappa == doctest::Approx(21.4));
    CHECK(p.chi == doctest::Approx(0.973894).epsilon(1e-5));
    CHECK(p.n0 == doctest::Approx(59.0));
    CHECK(p.gamma0 == doctest::Approx(1.0 / 291.0));
    CHECK(p.lambda_snr == doctest::Approx(2.0826).epsilon(1e-4));
    CHECK(p.gamma_p == doctest::Approx(0.0283558).epsilon(1e-4));
}

TEST_CASE("unknown preset rejected") {
    CHECK_THROWS_AS(preset("osaka"), std::invalid_argument);
}

TEST_CASE("lambda pins the reference separation to erf argument 2.9") {
    for (const char* name : {"kyoto", "brisbane"}) {
        const DeviceParams p = preset(name);
        CHECK(p.lambda_snr * steady_separation(p) == doctest::Approx(2.9).epsilon(1e-9));
    }
}

TEST_CASE("decay fit makes the reference square pulse peak at 0.995") {
    for (const char* name : {"kyoto", "brisbane"}) {
        const DeviceParams p = preset(name);
        CHECK(square_peak_fidelity(p) == doctest::Approx(0.995).epsilon(2e-4));
    }
}

TEST_CASE("decay fit is reproducible and monotone in its target") {
    DeviceParams p = preset("kyoto");
    const DriveWaveform square = to_physical(std::vector<double>(kActionSamples, 1.0), p);
    const DecayFit refit = calibrate_decay_model(0.995, square, p);
    CHECK(refit.lambda_snr == doctest::Approx(p.lambda_snr).epsilon(1e-12));
    CHECK(refit.gamma_p == doctest::Approx(p.gamma_p).epsilon(1e-9));

    // A lower fidelity target needs more dephasing.
    const DecayFit softer = calibrate_decay_model(0.99, square, p);
    CHECK(softer.gamma_p > refit.gamma_p);

    CHECK_THROWS_AS(calibrate_decay_model(0.49, square, p), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_decay_model(0.9999999, square, p), CalibrationError);
}
