#include "readout/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "readout/csvio.hpp"
#include "readout/parallel.hpp"
#include "readout/transform.hpp"

namespace readout {

namespace {

bool all_finite(const ParamGrads& g) {
    return std::isfinite(g.squared_norm());
}

}  // namespace

PpoTrainer::PpoTrainer(int action_dim, EnvFn env, PpoConfig config)
    : cfg_(config), action_dim_(action_dim), env_(std::move(env)), rng_(config.seed) {
    if (action_dim < 1) {
        throw std::invalid_argument("ppo: action_dim must be >= 1");
    }
    if (cfg_.n_envs < 1 || cfg_.updates < 0 || cfg_.epochs < 1 || cfg_.minibatches < 1) {
        throw std::invalid_argument("ppo: counts must be >= 1 (updates may be 0)");
    }
    if (cfg_.n_envs % cfg_.minibatches != 0) {
        throw std::invalid_argument("ppo: n_envs must divide evenly into minibatches");
    }
    if (!(cfg_.lr > 0.0) || !(cfg_.clip_eps > 0.0) || !(cfg_.value_clip_eps > 0.0) ||
        !(cfg_.max_grad_norm > 0.0)) {
        throw std::invalid_argument("ppo: rates and clip ranges must be > 0");
    }
    if (!env_) {
        throw std::invalid_argument("ppo: missing environment hook");
    }
    net_ = PolicyNet::init(1, action_dim, cfg_.hidden, rng_);
    opt_ = AdamState::zeros_like(net_);
}

std::vector<double> PpoTrainer::mean_action() const {
    const ForwardCache c = forward(net_, Eigen::MatrixXd::Zero(1, 1));
    return {c.mean.data(), c.mean.data() + c.mean.size()};
}

PpoTrainer::Batch PpoTrainer::collect_batch() {
    const int n = cfg_.n_envs;
    Batch batch;
    batch.actions.resize(n, action_dim_);
    batch.log_probs.resize(n);
    batch.rewards.resize(n);
    batch.values.resize(n);
    batch.infos.resize(n);

    // The observation is a constant, so one forward pass serves every env.
    const ForwardCache c = forward(net_, Eigen::MatrixXd::Zero(1, 1));
    const Eigen::VectorXd mean = c.mean.row(0).transpose();

    // Actions are drawn serially so the stream of random numbers (and thus
    // the whole run) is independent of any evaluation parallelism.
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd a = sample_action(mean, net_.log_std, rng_);
        batch.actions.row(i) = a.transpose();
        batch.log_probs(i) = log_prob(a, mean, net_.log_std);
        batch.values(i) = c.value(0);
    }
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        const auto row = batch.actions.row(static_cast<Eigen::Index>(i));
        const std::vector<double> action(row.begin(), row.end());
        batch.infos[i] = env_(action);
    });
    for (int i = 0; i < n; ++i) {
        batch.rewards(i) = batch.infos[i].total;
    }
    return batch;
}

PpoTrainer::UpdateStats PpoTrainer::update_policy(const Batch& batch) {
    const int n = cfg_.n_envs;
    const int mb_size = n / cfg_.minibatches;
    UpdateStats stats;

    // Single-step episodes: the advantage is exactly reward - value.
    Eigen::VectorXd adv = batch.rewards - batch.values;
    const double adv_mean = adv.mean();
    const double adv_std = std::sqrt((adv.array() - adv_mean).square().mean());
    adv = (adv.array() - adv_mean) / (adv_std + 1e-8);

    // Snapshot for rollback if a minibatch step turns out non-finite.
    const PolicyNet net_before = net_;
    const AdamState opt_before = opt_;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    int steps = 0;
    double actor_acc = 0.0, value_acc = 0.0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng_);
        for (int mb = 0; mb < cfg_.minibatches; ++mb) {
            const int lo = mb * mb_size;
            const ForwardCache cache = forward(net_, Eigen::MatrixXd::Zero(mb_size, 1));

            Eigen::MatrixXd grad_mean = Eigen::MatrixXd::Zero(mb_size, action_dim_);
            Eigen::VectorXd grad_value = Eigen::VectorXd::Zero(mb_size);
            Eigen::VectorXd grad_log_std = Eigen::VectorXd::Zero(action_dim_);

            double actor_loss = 0.0, value_loss = 0.0;
            const double inv_k = 1.0 / static_cast<double>(mb_size);
            for (int r = 0; r < mb_size; ++r) {
                const int i = order[lo + r];
                const Eigen::VectorXd action = batch.actions.row(i).transpose();
                const Eigen::VectorXd mean = cache.mean.row(r).transpose();
                const double lp_new = log_prob(action, mean, net_.log_std);
                const double ratio = std::exp(lp_new - batch.log_probs(i));
                const double clipped =
                    std::clamp(ratio, 1.0 - cfg_.clip_eps, 1.0 + cfg_.clip_eps);
                const double a_hat = adv(i);
                const double surr1 = ratio * a_hat;
                const double surr2 = clipped * a_hat;
                actor_loss -= inv_k * std::min(surr1, surr2);

                // Policy gradient flows only through the unclipped branch.
                if (surr1 <= surr2) {
                    const double glp = -inv_k * a_hat * ratio;
                    for (int j = 0; j < action_dim_; ++j) {
                        const double sigma = std::exp(net_.log_std(j));
                        const double z = (action(j) - mean(j)) / sigma;
                        grad_mean(r, j) += glp * z / sigma;       // d lp / d mean
                        grad_log_std(j) += glp * (z * z - 1.0);   // d lp / d log_std
                    }
                }

                // Clipped value loss, gradient through the larger branch.
                const double v_new = cache.value(r);
                const double v_old = batch.values(i);
                const double v_clip =
                    v_old + std::clamp(v_new - v_old, -cfg_.value_clip_eps, cfg_.value_clip_eps);
                const double e1 = v_new - batch.rewards(i);
                const double e2 = v_clip - batch.rewards(i);
                value_loss += inv_k * std::max(e1 * e1, e2 * e2);
                if (e1 * e1 >= e2 * e2) {
                    grad_value(r) += cfg_.value_loss_coef * inv_k * 2.0 * e1;
                }
            }
            if (cfg_.entropy_coef != 0.0) {
                // Diagonal-Gaussian entropy depends only on log_std.
                grad_log_std.array() -= cfg_.entropy_coef;
            }

            ParamGrads grads = backward(net_, cache, grad_mean, grad_value);
            grads.log_std = grad_log_std;
            clip_global_norm(grads, cfg_.max_grad_norm);

            const double total_loss = actor_loss + cfg_.value_loss_coef * value_loss;
            if (!std::isfinite(total_loss) || !all_finite(grads)) {
                net_ = net_before;
                opt_ = opt_before;
                stats.skipped_steps += 1;
                stats.actor_loss = actor_acc / std::max(1, steps);
                stats.value_loss = value_acc / std::max(1, steps);
                return stats;
            }
            adam_step(net_, grads, opt_, cfg_.lr);
            net_.log_std = net_.log_std.cwiseMax(-5.0).cwiseMin(2.0);

            actor_acc += actor_loss;
            value_acc += value_loss;
            ++steps;
        }
    }
    stats.actor_loss = actor_acc / std::max(1, steps);
    stats.value_loss = value_acc / std::max(1, steps);
    return stats;
}

TrainingLog PpoTrainer::train(const std::function<void(const UpdateRecord&)>& on_update) {
    TrainingLog log;
    log.rows.reserve(static_cast<std::size_t>(std::max(0, cfg_.updates)));
    if (cfg_.updates <= 0) {
        log.mean_actions[0] = mean_action();  // untrained policy snapshot
        return log;
    }
    for (int update = 1; update <= cfg_.updates; ++update) {
        const Batch batch = collect_batch();

        UpdateRecord rec;
        rec.update = update;
        auto stat_of = [&](const std::function<double(const RewardBreakdown&)>& get) {
            const int n = cfg_.n_envs;
            double mean = 0.0;
            for (const RewardBreakdown& info : batch.infos) {
                mean += get(info) / n;
            }
            double var = 0.0;
            for (const RewardBreakdown& info : batch.infos) {
                const double d = get(info) - mean;
                var += d * d / n;
            }
            return Stat{mean, std::sqrt(var)};
        };
        rec.reward = stat_of([](const RewardBreakdown& b) { return b.total; });
        rec.fidelity_term = stat_of([](const RewardBreakdown& b) { return b.fidelity_term; });
        rec.time_term = stat_of([](const RewardBreakdown& b) { return b.time_term; });
        rec.smoothness_term = stat_of([](const RewardBreakdown& b) { return b.smoothness_term; });
        rec.terminal_term = stat_of([](const RewardBreakdown& b) { return b.terminal_term; });
        rec.photon_term = stat_of([](const RewardBreakdown& b) { return b.photon_term; });
        rec.order_term = stat_of([](const RewardBreakdown& b) { return b.order_term; });
        for (const RewardBreakdown& info : batch.infos) {
            rec.failures += info.failed ? 1 : 0;
        }

        const UpdateStats stats = update_policy(batch);
        rec.actor_loss = stats.actor_loss;
        rec.value_loss = stats.value_loss;
        rec.skipped_steps = stats.skipped_steps;
        log.rows.push_back(rec);

        const bool checkpoint =
            update == cfg_.updates || std::find(cfg_.checkpoint_updates.begin(),
                                                cfg_.checkpoint_updates.end(),
                                                update) != cfg_.checkpoint_updates.end();
        if (checkpoint) {
            log.mean_actions[update] = mean_action();
        }
        if (on_update) {
            on_update(rec);
        }
    }
    return log;
}

void write_training_log_csv(const std::string& path, const TrainingLog& log) {
    std::vector<std::string> lines;
    lines.reserve(log.rows.size() + 1);
    lines.emplace_back(
        "update,reward_mean,reward_std,fidelity_mean,fidelity_std,time_mean,time_std,"
        "smoothness_mean,smoothness_std,terminal_mean,terminal_std,photon_mean,photon_std,"
        "order_mean,order_std,actor_loss,value_loss,failures,skipped_steps");
    for (const UpdateRecord& r : log.rows) {
        std::string row = std::to_string(r.update);
        row += ',' + csv_row({r.reward.mean, r.reward.std, r.fidelity_term.mean,
                              r.fidelity_term.std, r.time_term.mean, r.time_term.std,
                              r.smoothness_term.mean, r.smoothness_term.std,
                              r.terminal_term.mean, r.terminal_term.std, r.photon_term.mean,
                              r.photon_term.std, r.order_term.mean, r.order_term.std,
                              r.actor_loss, r.value_loss});
        row += ',' + std::to_string(r.failures);
        row += ',' + std::to_string(r.skipped_steps);
        lines.push_back(row);
    }
    write_lines(path, lines);
}

TrainingLog train_readout_policy(const DeviceParams& params, const RewardConfig& reward,
                                 const PpoConfig& config, PolicyNet* out_net,
                                 const std::function<void(const UpdateRecord&)>& on_update) {
    EnvFn env = [params, reward](const std::vector<double>& action) {
        return evaluate_action(action, params, reward);
    };
    PpoTrainer trainer(kActionSamples, std::move(env), config);
    TrainingLog log = trainer.train(on_update);
    if (out_net) {
        *out_net = trainer.net();
    }
    return log;
}

}  // namespace readout
