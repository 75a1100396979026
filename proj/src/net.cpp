#include "readout/net.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "readout/csvio.hpp"

namespace readout {

namespace {

// All parameter tensors in one fixed traversal order (used by the optimizer,
// norms and checkpoint serialization so they never disagree).
struct Slab {
    double* data;
    std::ptrdiff_t size;
};

template <typename NetLike>
std::vector<Slab> slabs(NetLike& p) {
    return {{p.w1.data(), p.w1.size()},   {p.b1.data(), p.b1.size()},
            {p.w2.data(), p.w2.size()},   {p.b2.data(), p.b2.size()},
            {p.wm.data(), p.wm.size()},   {p.bm.data(), p.bm.size()},
            {p.wv.data(), p.wv.size()},   {p.bv.data(), p.bv.size()},
            {p.log_std.data(), p.log_std.size()}};
}

double uniform_pm(std::mt19937_64& rng, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    return dist(rng);
}

void fill_uniform(Eigen::MatrixXd& m, std::mt19937_64& rng, double bound) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = uniform_pm(rng, bound);
        }
    }
}

void fill_uniform(Eigen::VectorXd& v, std::mt19937_64& rng, double bound) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = uniform_pm(rng, bound);
    }
}

}  // namespace

PolicyNet PolicyNet::init(int obs_dim, int action_dim, int hidden, std::mt19937_64& rng) {
    if (obs_dim < 1 || action_dim < 1 || hidden < 1) {
        throw std::invalid_argument("policy net: dimensions must be >= 1");
    }
    PolicyNet net;
    net.w1.resize(hidden, obs_dim);
    net.b1.resize(hidden);
    net.w2.resize(hidden, hidden);
    net.b2.resize(hidden);
    net.wm.resize(action_dim, hidden);
    net.bm.resize(action_dim);
    net.wv.resize(1, hidden);
    net.bv.resize(1);
    net.log_std = Eigen::VectorXd::Constant(action_dim, -0.5);

    const double bound1 = 1.0 / std::sqrt(static_cast<double>(obs_dim));
    const double bound_h = 1.0 / std::sqrt(static_cast<double>(hidden));
    fill_uniform(net.w1, rng, bound1);
    fill_uniform(net.b1, rng, bound1);
    fill_uniform(net.w2, rng, bound_h);
    fill_uniform(net.b2, rng, bound_h);
    fill_uniform(net.wm, rng, bound_h);
    fill_uniform(net.bm, rng, bound_h);
    net.wm *= 0.01;  // small initial policy mean
    net.bm *= 0.01;
    fill_uniform(net.wv, rng, bound_h);
    fill_uniform(net.bv, rng, bound_h);
    return net;
}

ForwardCache forward(const PolicyNet& net, const Eigen::MatrixXd& x) {
    if (x.cols() != net.obs_dim()) {
        throw std::invalid_argument("forward: observation width mismatch");
    }
    ForwardCache c;
    c.x = x;
    c.z1 = (x * net.w1.transpose()).rowwise() + net.b1.transpose();
    c.h1 = c.z1.unaryExpr([](double v) { return relu6(v); });
    c.z2 = (c.h1 * net.w2.transpose()).rowwise() + net.b2.transpose();
    c.h2 = c.z2.unaryExpr([](double v) { return relu6(v); });
    c.mean = (c.h2 * net.wm.transpose()).rowwise() + net.bm.transpose();
    c.value = ((c.h2 * net.wv.transpose()).col(0).array() + net.bv(0)).matrix();
    return c;
}

ParamGrads ParamGrads::zeros_like(const PolicyNet& net) {
    ParamGrads g;
    g.w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    g.b1 = Eigen::VectorXd::Zero(net.b1.size());
    g.w2 = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
    g.b2 = Eigen::VectorXd::Zero(net.b2.size());
    g.wm = Eigen::MatrixXd::Zero(net.wm.rows(), net.wm.cols());
    g.bm = Eigen::VectorXd::Zero(net.bm.size());
    g.wv = Eigen::MatrixXd::Zero(net.wv.rows(), net.wv.cols());
    g.bv = Eigen::VectorXd::Zero(net.bv.size());
    g.log_std = Eigen::VectorXd::Zero(net.log_std.size());
    return g;
}

double ParamGrads::squared_norm() const {
    double acc = 0.0;
    for (const Slab& s : slabs(const_cast<ParamGrads&>(*this))) {
        for (std::ptrdiff_t i = 0; i < s.size; ++i) {
            acc += s.data[i] * s.data[i];
        }
    }
    return acc;
}

void ParamGrads::scale(double factor) {
    for (const Slab& s : slabs(*this)) {
        for (std::ptrdiff_t i = 0; i < s.size; ++i) {
            s.data[i] *= factor;
        }
    }
}

ParamGrads backward(const PolicyNet& net, const ForwardCache& cache,
                    const Eigen::MatrixXd& grad_mean, const Eigen::VectorXd& grad_value) {
    ParamGrads g = ParamGrads::zeros_like(net);
    auto relu6_mask = [](const Eigen::MatrixXd& z) {
        return z.unaryExpr([](double v) { return (v > 0.0 && v < 6.0) ? 1.0 : 0.0; });
    };

    g.wm = grad_mean.transpose() * cache.h2;
    g.bm = grad_mean.colwise().sum().transpose();
    g.wv = grad_value.transpose() * cache.h2;
    g.bv(0) = grad_value.sum();

    Eigen::MatrixXd gh2 = grad_mean * net.wm + grad_value * net.wv;
    Eigen::MatrixXd gz2 = gh2.cwiseProduct(relu6_mask(cache.z2));
    g.w2 = gz2.transpose() * cache.h1;
    g.b2 = gz2.colwise().sum().transpose();

    Eigen::MatrixXd gh1 = gz2 * net.w2;
    Eigen::MatrixXd gz1 = gh1.cwiseProduct(relu6_mask(cache.z1));
    g.w1 = gz1.transpose() * cache.x;
    g.b1 = gz1.colwise().sum().transpose();
    return g;
}

Eigen::VectorXd sample_action(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                              std::mt19937_64& rng) {
    if (mean.size() != log_std.size()) {
        throw std::invalid_argument("sample_action: mean/log_std size mismatch");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd action(mean.size());
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        action(i) = mean(i) + std::exp(log_std(i)) * normal(rng);
    }
    return action;
}

double log_prob(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                const Eigen::VectorXd& log_std) {
    if (action.size() != mean.size() || mean.size() != log_std.size()) {
        throw std::invalid_argument("log_prob: size mismatch");
    }
    constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
    double lp = 0.0;
    for (Eigen::Index i = 0; i < action.size(); ++i) {
        const double z = (action(i) - mean(i)) / std::exp(log_std(i));
        lp += -0.5 * z * z - log_std(i) - kLogSqrt2Pi;
    }
    return lp;
}

void clip_global_norm(ParamGrads& grads, double max_norm) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > max_norm && norm > 0.0) {
        grads.scale(max_norm / norm);
    }
}

AdamState AdamState::zeros_like(const PolicyNet& net) {
    AdamState s;
    s.m = ParamGrads::zeros_like(net);
    s.v = ParamGrads::zeros_like(net);
    s.step = 0;
    return s;
}

void adam_step(PolicyNet& net, const ParamGrads& grads, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    auto net_slabs = slabs(net);
    auto g_slabs = slabs(const_cast<ParamGrads&>(grads));
    auto m_slabs = slabs(state.m);
    auto v_slabs = slabs(state.v);
    for (std::size_t t = 0; t < net_slabs.size(); ++t) {
        if (net_slabs[t].size != g_slabs[t].size) {
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        }
        for (std::ptrdiff_t i = 0; i < net_slabs[t].size; ++i) {
            const double g = g_slabs[t].data[i];
            double& m = m_slabs[t].data[i];
            double& v = v_slabs[t].data[i];
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g * g;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            net_slabs[t].data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

void save_checkpoint(const std::string& path, const PolicyNet& net) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint: " + path);
    }
    out << "policy " << net.obs_dim() << ' ' << net.action_dim() << ' ' << net.hidden_dim()
        << '\n';
    auto& mutable_net = const_cast<PolicyNet&>(net);
    for (const Slab& s : slabs(mutable_net)) {
        for (std::ptrdiff_t i = 0; i < s.size; ++i) {
            out << fmt_g17(s.data[i]) << '\n';
        }
    }
    if (!out) {
        throw std::runtime_error("checkpoint write failed: " + path);
    }
}

PolicyNet load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint: " + path);
    }
    std::string tag;
    int obs = 0, act = 0, hidden = 0;
    in >> tag >> obs >> act >> hidden;
    if (!in || tag != "policy") {
        throw std::runtime_error("bad checkpoint header: " + path);
    }
    std::mt19937_64 dummy(0);
    PolicyNet net = PolicyNet::init(obs, act, hidden, dummy);
    for (const Slab& s : slabs(net)) {
        for (std::ptrdiff_t i = 0; i < s.size; ++i) {
            if (!(in >> s.data[i])) {
                throw std::runtime_error("truncated checkpoint: " + path);
            }
        }
    }
    return net;
}

}  // namespace readout
