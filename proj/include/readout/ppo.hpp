#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "readout/net.hpp"
#include "readout/reward.hpp"

namespace readout {

// Single-step-episode PPO hyperparameters.
struct PpoConfig {
    double lr = 3e-4;
    int n_envs = 128;
    int updates = 5000;
    int epochs = 4;
    int minibatches = 4;
    double clip_eps = 0.2;
    double value_clip_eps = 0.2;
    double entropy_coef = 0.0;
    double value_loss_coef = 0.5;
    double max_grad_norm = 0.5;
    int hidden = 128;
    std::uint64_t seed = 0;
    std::vector<int> checkpoint_updates = {80, 300};  // final update is always kept
};

// Batch mean/std pair for one logged quantity.
struct Stat {
    double mean = 0.0;
    double std = 0.0;
};

// Per-update statistics: total reward and every breakdown term.
struct UpdateRecord {
    int update = 0;
    Stat reward;
    Stat fidelity_term;
    Stat time_term;
    Stat smoothness_term;
    Stat terminal_term;
    Stat photon_term;
    Stat order_term;
    double actor_loss = 0.0;
    double value_loss = 0.0;
    int failures = 0;       // episodes that hit the failure sentinel
    int skipped_steps = 0;  // minibatch steps rolled back due to non-finite loss/grads
};

struct TrainingLog {
    std::vector<UpdateRecord> rows;
    // Deterministic mean action (policy mode) captured at checkpoint updates.
    std::map<int, std::vector<double>> mean_actions;
};

void write_training_log_csv(const std::string& path, const TrainingLog& log);

// Environment hook: maps a raw action to its scalar reward and term breakdown.
using EnvFn = std::function<RewardBreakdown(const std::vector<double>&)>;

// Proximal-policy trainer for one-step episodes with a constant observation.
// Advantage is exactly reward - value; both policy-ratio and value losses are
// clipped, gradients are global-norm clipped, Adam does the updates.
class PpoTrainer {
  public:
    PpoTrainer(int action_dim, EnvFn env, PpoConfig config);

    // Runs config.updates rounds; optional per-update callback (e.g. progress).
    TrainingLog train(const std::function<void(const UpdateRecord&)>& on_update = {});

    const PolicyNet& net() const { return net_; }
    PolicyNet& net() { return net_; }
    std::vector<double> mean_action() const;

    // One batch of fresh episodes under the current policy (exposed for tests).
    struct Batch {
        Eigen::MatrixXd actions;      // (n_envs x action_dim)
        Eigen::VectorXd log_probs;    // behavior log-densities
        Eigen::VectorXd rewards;
        Eigen::VectorXd values;       // critic at collection time
        std::vector<RewardBreakdown> infos;
    };
    Batch collect_batch();

    // One PPO optimization round over a collected batch; returns loss stats.
    struct UpdateStats {
        double actor_loss = 0.0;
        double value_loss = 0.0;
        int skipped_steps = 0;
    };
    UpdateStats update_policy(const Batch& batch);

  private:
    PpoConfig cfg_;
    int action_dim_;
    EnvFn env_;
    PolicyNet net_;
    AdamState opt_;
    std::mt19937_64 rng_;
};

// Readout-pulse training entry point: wires the reward environment for the
// given device into PpoTrainer with the 121-sample action space.
TrainingLog train_readout_policy(const DeviceParams& params, const RewardConfig& reward,
                                 const PpoConfig& config, PolicyNet* out_net = nullptr,
                                 const std::function<void(const UpdateRecord&)>& on_update = {});

}  // namespace readout
