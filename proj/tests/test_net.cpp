#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "readout/net.hpp"

using namespace readout;

namespace {

// Scalar functional with fixed upstream weights: L = sum(mean .* gm) + value . gv.
// backward() returns its exact parameter gradient.
double upstream_loss(const PolicyNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& gm,
                     const Eigen::VectorXd& gv) {
    const ForwardCache c = forward(net, x);
    return (c.mean.array() * gm.array()).sum() + c.value.dot(gv);
}

struct ParamView {
    double* data;
    long size;
};

std::vector<ParamView> views(PolicyNet& net) {
    return {
        {net.w1.data(), net.w1.size()}, {net.b1.data(), net.b1.size()},
        {net.w2.data(), net.w2.size()}, {net.b2.data(), net.b2.size()},
        {net.wm.data(), net.wm.size()}, {net.bm.data(), net.bm.size()},
        {net.wv.data(), net.wv.size()}, {net.bv.data(), net.bv.size()},
    };
}

std::vector<ParamView> views(ParamGrads& g) {
    return {
        {g.w1.data(), g.w1.size()}, {g.b1.data(), g.b1.size()},
        {g.w2.data(), g.w2.size()}, {g.b2.data(), g.b2.size()},
        {g.wm.data(), g.wm.size()}, {g.bm.data(), g.bm.size()},
        {g.wv.data(), g.wv.size()}, {g.bv.data(), g.bv.size()},
    };
}

double max_relative_gradient_error(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int obs = 3, act = 4, hidden = 8, batch = 5;
    PolicyNet net = PolicyNet::init(obs, act, hidden, rng);

    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(batch, obs), gm(batch, act);
    Eigen::VectorXd gv(batch);
    for (long i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    for (long i = 0; i < gm.size(); ++i) gm.data()[i] = gauss(rng);
    for (long i = 0; i < gv.size(); ++i) gv(i) = gauss(rng);

    const ForwardCache cache = forward(net, x);
    ParamGrads analytic = backward(net, cache, gm, gv);

    const double h = 1e-5;
    double worst = 0.0;
    auto nviews = views(net);
    auto gviews = views(analytic);
    for (std::size_t p = 0; p < nviews.size(); ++p) {
        for (long i = 0; i < nviews[p].size; ++i) {
            double& theta = nviews[p].data[i];
            const double saved = theta;
            theta = saved + h;
            const double up = upstream_loss(net, x, gm, gv);
            theta = saved - h;
            const double dn = upstream_loss(net, x, gm, gv);
            theta = saved;
            const double fd = (up - dn) / (2.0 * h);
            const double an = gviews[p].data[i];
            const double rel = std::abs(an - fd) / std::max(1e-6, std::abs(an) + std::abs(fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("relu6 clamps both sides") {
    CHECK(relu6(7.0) == 6.0);
    CHECK(relu6(-1.0) == 0.0);
    CHECK(relu6(3.25) == 3.25);
    CHECK(relu6(0.0) == 0.0);
    CHECK(relu6(6.0) == 6.0);
}

TEST_CASE("init: shapes, scales, determinism") {
    std::mt19937_64 rng(5);
    const PolicyNet net = PolicyNet::init(1, 121, 128, rng);
    CHECK(net.obs_dim() == 1);
    CHECK(net.action_dim() == 121);
    CHECK(net.hidden_dim() == 128);
    CHECK(net.w2.rows() == 128);
    CHECK(net.w2.cols() == 128);
    CHECK(net.wv.rows() == 1);
    CHECK((net.log_std.array() == -0.5).all());
    // Mean head shrunk so the initial pulse hugs zero.
    CHECK(net.wm.cwiseAbs().maxCoeff() < 0.01 / std::sqrt(128.0) + 1e-12);
    CHECK(net.bm.cwiseAbs().maxCoeff() < 0.01 / std::sqrt(128.0) + 1e-12);
    CHECK(net.w1.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);

    std::mt19937_64 rng2(5);
    const PolicyNet net2 = PolicyNet::init(1, 121, 128, rng2);
    CHECK(net.w1 == net2.w1);
    CHECK(net.wm == net2.wm);
    CHECK(net.b2 == net2.b2);
}

TEST_CASE("forward: zero parameters give zero outputs; calls are pure") {
    std::mt19937_64 rng(9);
    PolicyNet net = PolicyNet::init(2, 3, 4, rng);
    for (ParamView v : views(net)) {
        for (long i = 0; i < v.size; ++i) v.data[i] = 0.0;
    }
    Eigen::MatrixXd x(2, 2);
    x << 0.3, -1.0, 2.0, 0.5;
    const ForwardCache c = forward(net, x);
    CHECK(c.mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.value.cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng2(10);
    const PolicyNet rnd = PolicyNet::init(2, 3, 4, rng2);
    const ForwardCache a = forward(rnd, x);
    const ForwardCache b = forward(rnd, x);
    CHECK(a.mean == b.mean);
    CHECK(a.value == b.value);
}

TEST_CASE("backward matches central finite differences") {
    for (const std::uint64_t seed : {101u, 102u, 103u, 104u, 105u}) {
        CHECK(max_relative_gradient_error(seed) < 1e-4);
    }
}

TEST_CASE("backward: closed-form mean-head gradients") {
    std::mt19937_64 rng(77);
    const PolicyNet net = PolicyNet::init(3, 4, 8, rng);
    Eigen::MatrixXd x(5, 3), gm(5, 4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (long i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    for (long i = 0; i < gm.size(); ++i) gm.data()[i] = gauss(rng);
    const ForwardCache cache = forward(net, x);
    const ParamGrads g = backward(net, cache, gm, Eigen::VectorXd::Zero(5));
    // mean = h2 * wm^T + bm row-wise, so dL/dwm = gm^T h2 and dL/dbm = colsum(gm).
    CHECK((g.wm - gm.transpose() * cache.h2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.bm - gm.colwise().sum().transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(g.wv.cwiseAbs().maxCoeff() == 0.0);

    const ParamGrads none = backward(net, cache, Eigen::MatrixXd::Zero(5, 4),
                                     Eigen::VectorXd::Zero(5));
    CHECK(none.squared_norm() == 0.0);
}

TEST_CASE("gaussian sampling statistics and density") {
    Eigen::VectorXd mean(4), log_std(4);
    mean << 0.3, -0.2, 0.0, 1.0;
    log_std << -0.5, -1.0, 0.0, -2.0;

    std::mt19937_64 rng(2024);
    const int n = 100000;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd acc2 = Eigen::VectorXd::Zero(4);
    for (int s = 0; s < n; ++s) {
        const Eigen::VectorXd a = sample_action(mean, log_std, rng);
        acc += a;
        acc2 += (a - mean).cwiseAbs2();
    }
    const Eigen::VectorXd emp_mean = acc / n;
    for (int i = 0; i < 4; ++i) {
        const double sigma = std::exp(log_std(i));
        CHECK(std::abs(emp_mean(i) - mean(i)) < 4.0 * sigma / std::sqrt(double(n)));
        CHECK(std::sqrt(acc2(i) / n) == doctest::Approx(sigma).epsilon(0.05));
    }

    const double at_mode = log_prob(mean, mean, log_std);
    const double expected = -log_std.sum() - 0.5 * 4.0 * std::log(2.0 * M_PI);
    CHECK(at_mode == doctest::Approx(expected).epsilon(1e-12));
    // One sigma away in every coordinate costs d/2 nats.
    const Eigen::VectorXd off = mean + log_std.array().exp().matrix();
    CHECK(log_prob(off, mean, log_std) == doctest::Approx(at_mode - 2.0).epsilon(1e-12));
}

TEST_CASE("global norm clip") {
    std::mt19937_64 rng(3);
    const PolicyNet net = PolicyNet::init(2, 3, 4, rng);
    ParamGrads g = ParamGrads::zeros_like(net);
    g.w1.setConstant(0.7);
    g.bm.setConstant(-0.9);
    const double before = std::sqrt(g.squared_norm());
    REQUIRE(before > 0.5);
    clip_global_norm(g, 0.5);
    CHECK(std::sqrt(g.squared_norm()) <= 0.5 + 1e-12);
    CHECK(std::sqrt(g.squared_norm()) == doctest::Approx(0.5).epsilon(1e-9));
    // Direction preserved: all rescaled by the same factor.
    CHECK(g.w1(0, 0) / 0.7 == doctest::Approx(g.bm(0) / -0.9).epsilon(1e-12));

    ParamGrads small = ParamGrads::zeros_like(net);
    small.b1.setConstant(0.01);
    const double norm_small = std::sqrt(small.squared_norm());
    clip_global_norm(small, 0.5);
    CHECK(std::sqrt(small.squared_norm()) == norm_small);
}

TEST_CASE("adam: zero gradient is a no-op, first step follows the closed form") {
    std::mt19937_64 rng(4);
    PolicyNet net = PolicyNet::init(2, 3, 4, rng);
    const PolicyNet before = net;
    AdamState opt = AdamState::zeros_like(net);
    adam_step(net, ParamGrads::zeros_like(net), opt, 3e-4);
    CHECK(net.w1 == before.w1);
    CHECK(net.log_std == before.log_std);
    CHECK(opt.step == 1);

    ParamGrads g = ParamGrads::zeros_like(net);
    g.b1.setConstant(0.3);
    AdamState opt2 = AdamState::zeros_like(net);
    PolicyNet stepped = before;
    adam_step(stepped, g, opt2, 3e-4);
    // Bias-corrected first step: lr * g / (|g| + eps).
    const double expected = 3e-4 * 0.3 / (0.3 + 1e-8);
    CHECK((before.b1 - stepped.b1).cwiseAbs().maxCoeff() ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(stepped.w1 == before.w1);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    std::mt19937_64 rng(88);
    const PolicyNet net = PolicyNet::init(1, 121, 16, rng);
    const std::string path = "net_roundtrip.tmp";
    save_checkpoint(path, net);
    const PolicyNet back = load_checkpoint(path);
    CHECK(back.w1 == net.w1);
    CHECK(back.b1 == net.b1);
    CHECK(back.w2 == net.w2);
    CHECK(back.b2 == net.b2);
    CHECK(back.wm == net.wm);
    CHECK(back.bm == net.bm);
    CHECK(back.wv == net.wv);
    CHECK(back.bv == net.bv);
    CHECK(back.log_std == net.log_std);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_checkpoint("missing_checkpoint.tmp"), std::exception);
}
