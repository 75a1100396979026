#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

namespace readout {

// Gaussian-policy network with a shared two-layer ReLU6 trunk, a mean head,
// a scalar value head, and a state-independent log-std parameter vector.
// Rows of every activation matrix are batch entries.
struct PolicyNet {
    Eigen::MatrixXd w1, w2, wm, wv;  // (out x in)
    Eigen::VectorXd b1, b2, bm, bv;
    Eigen::VectorXd log_std;

    int obs_dim() const { return static_cast<int>(w1.cols()); }
    int hidden_dim() const { return static_cast<int>(w1.rows()); }
    int action_dim() const { return static_cast<int>(wm.rows()); }

    // Scaled-uniform fan-in init (weights and biases in +-1/sqrt(fan_in));
    // the mean head is shrunk by 0.01 so initial actions hug zero, log_std
    // starts at -0.5 everywhere.
    static PolicyNet init(int obs_dim, int action_dim, int hidden, std::mt19937_64& rng);
};

inline double relu6(double x) { return x < 0.0 ? 0.0 : (x > 6.0 ? 6.0 : x); }

// Activations cached by the forward pass for use in backward().
struct ForwardCache {
    Eigen::MatrixXd x, z1, h1, z2, h2;
    Eigen::MatrixXd mean;    // (batch x action_dim)
    Eigen::VectorXd value;   // (batch)
};

ForwardCache forward(const PolicyNet& net, const Eigen::MatrixXd& x);

// Parameter-shaped container, used for gradients and Adam moments.
struct ParamGrads {
    Eigen::MatrixXd w1, w2, wm, wv;
    Eigen::VectorXd b1, b2, bm, bv;
    Eigen::VectorXd log_std;

    static ParamGrads zeros_like(const PolicyNet& net);
    double squared_norm() const;
    void scale(double factor);
};

// Reverse pass from upstream gradients d(loss)/d(mean) and d(loss)/d(value).
// The log_std gradient is loss-specific and is filled in by the caller.
ParamGrads backward(const PolicyNet& net, const ForwardCache& cache,
                    const Eigen::MatrixXd& grad_mean, const Eigen::VectorXd& grad_value);

// Diagonal-Gaussian action sampling and log-density.
Eigen::VectorXd sample_action(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                              std::mt19937_64& rng);
double log_prob(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                const Eigen::VectorXd& log_std);

// Rescales grads in place so the global l2 norm is at most max_norm.
void clip_global_norm(ParamGrads& grads, double max_norm);

struct AdamState {
    ParamGrads m, v;
    long step = 0;

    static AdamState zeros_like(const PolicyNet& net);
};

void adam_step(PolicyNet& net, const ParamGrads& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Text checkpoint: "policy <obs> <action> <hidden>" header then one %.17g
// parameter per line in fixed order. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const PolicyNet& net);
PolicyNet load_checkpoint(const std::string& path);

}  // namespace readout
