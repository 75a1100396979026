// readout-opt: simulate, train, and compare readout pulses from the command line.
//
// Subcommands: simulate, train, sweep-ratio, robustness. Configuration is a
// flat `key = value` file (# comments) merged under any command-line flags;
// unknown keys are rejected. All outputs are deterministic CSV/pulse files —
// no timestamps — so identical config+seed reruns are byte-identical.
// READOUT_OPT_THREADS caps the worker count.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure,
// 3 finished but not converged.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "readout/analytic.hpp"
#include "readout/csvio.hpp"
#include "readout/device.hpp"
#include "readout/langevin.hpp"
#include "readout/metrics.hpp"
#include "readout/ppo.hpp"
#include "readout/reward.hpp"
#include "readout/transform.hpp"
#include "readout/waveform.hpp"

namespace {

using namespace readout;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitNotConverged = 3;

// ---------------------------------------------------------------------------
// Flat key=value config file.

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file: " + path);
    }
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected `key = value`");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate key `" + key + "`");
        }
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) {
        throw ConfigError("key `" + key + "`: not a number: `" + value + "`");
    }
    return out;
}

long long parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) {
        throw ConfigError("key `" + key + "`: not an integer: `" + value + "`");
    }
    return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(value);
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) {
            out.push_back(parse_double(key, t));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration: documented defaults, overridden by config file then flags.

struct RunConfig {
    std::string subcommand;
    std::string preset_name = "kyoto";
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    // Device overrides (angular rates, 1/us). When physics fields change and
    // no explicit lambda_snr/gamma_p is given, the decay model is refitted so
    // the reference square pulse peaks at `square_fidelity`.
    std::map<std::string, double> device_overrides;
    double square_fidelity = 0.995;

    RewardConfig reward;   // k1..k6, n_cap, failure_reward
    bool n_cap_set = false;
    PpoConfig ppo;

    // train
    int n_seeds = 1;

    // simulate / robustness
    std::string waveform_path;       // pulse file; empty -> named pulse
    std::string pulse_name = "";     // square | zero | a4r | clear
    double grid_span = 0.1;
    int grid_points = 11;

    // sweep-ratio
    std::vector<double> ratios = {0.5, 2.0, 5.0, 10.0};
};

const std::set<std::string> kDeviceKeys = {"kappa", "chi", "n0", "f0", "gamma0",
                                           "gamma_p", "lambda_snr", "mu", "n_target"};
const std::set<std::string> kRewardKeys = {"k1", "k2", "k3", "k4", "k5", "k6",
                                           "n_cap", "failure_reward"};
const std::set<std::string> kPpoKeys = {"lr", "n_envs", "updates", "epochs", "minibatches",
                                        "clip_eps", "value_clip_eps", "entropy_coef",
                                        "value_loss_coef", "max_grad_norm", "hidden",
                                        "checkpoint_updates"};

std::set<std::string> allowed_keys(const std::string& subcommand) {
    std::set<std::string> keys = {"preset", "out", "seed", "square_fidelity"};
    keys.insert(kDeviceKeys.begin(), kDeviceKeys.end());
    if (subcommand == "train") {
        keys.insert(kRewardKeys.begin(), kRewardKeys.end());
        keys.insert(kPpoKeys.begin(), kPpoKeys.end());
        keys.insert("n_seeds");
    } else if (subcommand == "simulate") {
        keys.insert({"waveform", "pulse"});
    } else if (subcommand == "sweep-ratio") {
        keys.insert("ratios");
    } else if (subcommand == "robustness") {
        keys.insert({"waveform", "pulse", "grid_span", "grid_points"});
    }
    return keys;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    const std::set<std::string> allowed = allowed_keys(cfg.subcommand);
    for (const auto& [key, value] : kv) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key for `" + cfg.subcommand + "`: `" + key + "`");
        }
        if (key == "preset") {
            cfg.preset_name = value;
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "square_fidelity") {
            cfg.square_fidelity = parse_double(key, value);
        } else if (kDeviceKeys.count(key)) {
            cfg.device_overrides[key] = parse_double(key, value);
        } else if (key == "k1") {
            cfg.reward.k1 = parse_double(key, value);
        } else if (key == "k2") {
            cfg.reward.k2 = parse_double(key, value);
        } else if (key == "k3") {
            cfg.reward.k3 = parse_double(key, value);
        } else if (key == "k4") {
            cfg.reward.k4 = parse_double(key, value);
        } else if (key == "k5") {
            cfg.reward.k5 = parse_double(key, value);
        } else if (key == "k6") {
            cfg.reward.k6 = parse_double(key, value);
        } else if (key == "n_cap") {
            cfg.reward.n_cap = parse_double(key, value);
            cfg.n_cap_set = true;
        } else if (key == "failure_reward") {
            cfg.reward.failure_reward = parse_double(key, value);
        } else if (key == "lr") {
            cfg.ppo.lr = parse_double(key, value);
        } else if (key == "n_envs") {
            cfg.ppo.n_envs = static_cast<int>(parse_int(key, value));
        } else if (key == "updates") {
            cfg.ppo.updates = static_cast<int>(parse_int(key, value));
        } else if (key == "epochs") {
            cfg.ppo.epochs = static_cast<int>(parse_int(key, value));
        } else if (key == "minibatches") {
            cfg.ppo.minibatches = static_cast<int>(parse_int(key, value));
        } else if (key == "clip_eps") {
            cfg.ppo.clip_eps = parse_double(key, value);
        } else if (key == "value_clip_eps") {
            cfg.ppo.value_clip_eps = parse_double(key, value);
        } else if (key == "entropy_coef") {
            cfg.ppo.entropy_coef = parse_double(key, value);
        } else if (key == "value_loss_coef") {
            cfg.ppo.value_loss_coef = parse_double(key, value);
        } else if (key == "max_grad_norm") {
            cfg.ppo.max_grad_norm = parse_double(key, value);
        } else if (key == "hidden") {
            cfg.ppo.hidden = static_cast<int>(parse_int(key, value));
        } else if (key == "checkpoint_updates") {
            cfg.ppo.checkpoint_updates.clear();
            for (const double u : parse_list(key, value)) {
                cfg.ppo.checkpoint_updates.push_back(static_cast<int>(u));
            }
        } else if (key == "n_seeds") {
            cfg.n_seeds = static_cast<int>(parse_int(key, value));
        } else if (key == "waveform") {
            cfg.waveform_path = value;
        } else if (key == "pulse") {
            cfg.pulse_name = value;
        } else if (key == "grid_span") {
            cfg.grid_span = parse_double(key, value);
        } else if (key == "grid_points") {
            cfg.grid_points = static_cast<int>(parse_int(key, value));
        } else if (key == "ratios") {
            cfg.ratios = parse_list(key, value);
        }
    }
}

DeviceParams resolve_device(const RunConfig& cfg) {
    DeviceParams dev = preset(cfg.preset_name);
    bool physics_changed = false;
    bool fit_given = false;
    for (const auto& [key, value] : cfg.device_overrides) {
        if (key == "kappa") {
            dev.kappa = value;
            physics_changed = true;
        } else if (key == "chi") {
            dev.chi = value;
            physics_changed = true;
        } else if (key == "n0") {
            dev.n0 = value;
            physics_changed = true;
        } else if (key == "f0") {
            dev.f0 = value;
            physics_changed = true;
        } else if (key == "gamma0") {
            dev.gamma0 = value;
            physics_changed = true;
        } else if (key == "gamma_p") {
            dev.gamma_p = value;
            fit_given = true;
        } else if (key == "lambda_snr") {
            dev.lambda_snr = value;
            fit_given = true;
        } else if (key == "mu") {
            dev.mu = value;
        } else if (key == "n_target") {
            dev.n_target = value;
        }
    }
    if (physics_changed && !fit_given) {
        const DriveWaveform square =
            to_physical(std::vector<double>(kActionSamples, 1.0), dev);
        const DecayFit fit = calibrate_decay_model(cfg.square_fidelity, square, dev);
        dev.lambda_snr = fit.lambda_snr;
        dev.gamma_p = fit.gamma_p;
    }
    dev.validate();
    return dev;
}

// ---------------------------------------------------------------------------
// Shared helpers.

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Builds the requested pulse. `converged` reports the CLEAR optimizer flag
// (true for every other source).
DriveWaveform named_or_file_waveform(const RunConfig& cfg, const DeviceParams& dev,
                                     bool& converged) {
    converged = true;
    if (!cfg.waveform_path.empty()) {
        return read_waveform(cfg.waveform_path);
    }
    const std::string name = cfg.pulse_name.empty() ? "square" : cfg.pulse_name;
    if (name == "square") {
        return to_physical(std::vector<double>(kActionSamples, 1.0), dev);
    }
    if (name == "zero") {
        return to_physical(std::vector<double>(kActionSamples, 0.0), dev);
    }
    if (name == "a4r") {
        return build_a4r(calibrate_a4r(dev), dev);
    }
    if (name == "clear") {
        const ClearParams p = optimize_clear(dev);
        converged = p.converged;
        return build_clear(p, dev);
    }
    throw ConfigError("unknown pulse `" + name + "` (square, zero, a4r, clear)");
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const RunConfig& cfg) {
    const DeviceParams dev = resolve_device(cfg);
    bool converged = true;
    const DriveWaveform wave = named_or_file_waveform(cfg, dev, converged);
    const Trajectory traj = integrate(dev, wave);
    const ReadoutMetrics metrics = compute_metrics(traj, dev);

    const auto dir = ensure_out_dir(cfg);
    write_trajectory_csv((dir / "trajectory.csv").string(), traj);
    write_lines((dir / "metrics.csv").string(), {metrics_csv_header(), metrics_csv_row(metrics)});
    std::printf("f_max=%.6f t_f_max_ns=%.1f tau_r_ns=%.1f n_max=%.4f n_residual=%.6f\n",
                metrics.f_max, metrics.t_f_max_ns, metrics.tau_r_ns, metrics.n_max,
                metrics.n_residual);
    return converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const RunConfig& cfg) {
    const DeviceParams dev = resolve_device(cfg);
    RewardConfig reward = cfg.reward;
    if (!cfg.n_cap_set) {
        reward.n_cap = dev.n0;
    }
    if (cfg.n_seeds < 1) {
        throw ConfigError("n_seeds must be >= 1");
    }
    const auto dir = ensure_out_dir(cfg);

    std::vector<std::string> summary = {"seed,f_max,total_duration_ns,failed"};
    bool any_failed = false;
    for (int s = 0; s < cfg.n_seeds; ++s) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        PpoConfig ppo = cfg.ppo;
        ppo.seed = seed;
        const std::string tag = "seed" + std::to_string(seed);

        std::vector<UpdateRecord> partial;
        PolicyNet net;
        TrainingLog log;
        try {
            log = train_readout_policy(dev, reward, ppo, &net,
                                       [&](const UpdateRecord& r) { partial.push_back(r); });
        } catch (const std::exception& e) {
            TrainingLog partial_log;
            partial_log.rows = partial;
            write_training_log_csv((dir / ("train_" + tag + ".csv")).string(), partial_log);
            std::fprintf(stderr, "training aborted for %s: %s\n", tag.c_str(), e.what());
            throw;
        }
        write_training_log_csv((dir / ("train_" + tag + ".csv")).string(), log);
        for (const auto& [update, action] : log.mean_actions) {
            write_waveform(
                (dir / ("checkpoint_u" + std::to_string(update) + "_" + tag + ".pulse")).string(),
                to_physical(action, dev));
        }

        // Deterministic output pulse of the trained policy and its score.
        const std::vector<double> action =
            log.mean_actions.count(ppo.updates)
                ? log.mean_actions.at(ppo.updates)
                : std::vector<double>(kActionSamples, 0.0);
        const DriveWaveform wave = to_physical(action, dev);
        write_waveform((dir / ("waveform_" + tag + ".pulse")).string(), wave);
        const RewardBreakdown score = evaluate_action(action, dev, reward);
        any_failed = any_failed || score.failed;
        summary.push_back(std::to_string(seed) + "," + fmt_g17(score.metrics.f_max) + "," +
                          fmt_g17(score.metrics.tau_r_ns) + "," + (score.failed ? "1" : "0"));
        std::printf("seed %llu: f_max=%.6f total_duration_ns=%.1f%s\n",
                    static_cast<unsigned long long>(seed), score.metrics.f_max,
                    score.metrics.tau_r_ns, score.failed ? " (failed)" : "");
    }
    write_lines((dir / "summary.csv").string(), summary);
    return any_failed ? kExitNotConverged : kExitOk;
}

// ---------------------------------------------------------------------------
// sweep-ratio

int cmd_sweep_ratio(const RunConfig& cfg) {
    const auto dir = ensure_out_dir(cfg);
    std::vector<std::string> rows = {
        "ratio,a4r_f_max,a4r_total_ns,a4r_status,clear_f_max,clear_total_ns,clear_status"};
    bool any_failure = false;

    // Duration-comparison accounting: nominal-point calibration for both
    // pulse families (no drift corners, no robustness weighting).
    A4ROptions a4r_opts;
    a4r_opts.drift_fraction = 0.0;
    a4r_opts.robust_weight = 0.0;
    ClearOptions clear_opts;
    clear_opts.drift_fraction = 0.0;

    for (const double ratio : cfg.ratios) {
        std::string a4r_f = "nan", a4r_t = "nan", a4r_status = "ok";
        std::string clr_f = "nan", clr_t = "nan", clr_status = "ok";
        DeviceParams dev;
        bool have_device = true;
        try {
            dev = ratio_study_device(ratio);
        } catch (const std::exception&) {
            have_device = false;
            a4r_status = clr_status = "device-failed";
            any_failure = true;
        }
        if (have_device) {
            try {
                const A4RParams p = calibrate_a4r(dev, a4r_opts);
                const PulseReport rep = evaluate_drive(build_a4r(p, dev), dev);
                a4r_f = fmt_g17(rep.metrics.f_max);
                a4r_t = fmt_g17(rep.duration_ns);
            } catch (const std::exception&) {
                a4r_status = "failed";
                any_failure = true;
            }
            try {
                const ClearParams p = optimize_clear(dev, clear_opts);
                const PulseReport rep = evaluate_drive(build_clear(p, dev), dev);
                clr_f = fmt_g17(rep.metrics.f_max);
                clr_t = fmt_g17(rep.duration_ns);
                if (!p.converged) {
                    clr_status = "not-converged";
                    any_failure = true;
                }
            } catch (const std::exception&) {
                clr_status = "failed";
                any_failure = true;
            }
        }
        rows.push_back(fmt_g17(ratio) + "," + a4r_f + "," + a4r_t + "," + a4r_status + "," +
                       clr_f + "," + clr_t + "," + clr_status);
        std::printf("ratio %.3g: A4R %s/%s ns (%s), CLEAR %s/%s ns (%s)\n", ratio, a4r_f.c_str(),
                    a4r_t.c_str(), a4r_status.c_str(), clr_f.c_str(), clr_t.c_str(),
                    clr_status.c_str());
    }
    write_lines((dir / "sweep_ratio.csv").string(), rows);
    return any_failure ? kExitNotConverged : kExitOk;
}

// ---------------------------------------------------------------------------
// robustness

int cmd_robustness(const RunConfig& cfg) {
    if (cfg.grid_points < 1) {
        throw ConfigError("grid_points must be >= 1");
    }
    if (cfg.grid_span < 0.0 || cfg.grid_span >= 1.0) {
        throw ConfigError("grid_span must be in [0, 1)");
    }
    const DeviceParams dev = resolve_device(cfg);
    RunConfig source = cfg;
    if (source.waveform_path.empty() && source.pulse_name.empty()) {
        source.pulse_name = "a4r";
    }
    bool converged = true;
    const DriveWaveform wave = named_or_file_waveform(source, dev, converged);

    std::vector<double> offsets;
    for (int i = 0; i < cfg.grid_points; ++i) {
        offsets.push_back(cfg.grid_points == 1
                              ? 0.0
                              : -cfg.grid_span + 2.0 * cfg.grid_span * static_cast<double>(i) /
                                                     static_cast<double>(cfg.grid_points - 1));
    }
    std::vector<std::string> rows = {"kappa_offset,chi_offset,f_max,tau_r_ns"};
    bool any_failure = false;
    for (const double dk : offsets) {
        for (const double dc : offsets) {
            std::string f = "nan", tau = "nan";
            try {
                const DeviceParams cell = drifted_device(dev, 1.0 + dk, 1.0 + dc);
                const PulseReport rep = evaluate_drive(wave, cell);
                f = fmt_g17(rep.metrics.f_max);
                tau = fmt_g17(rep.duration_ns);
            } catch (const std::exception&) {
                any_failure = true;
            }
            rows.push_back(fmt_g17(dk) + "," + fmt_g17(dc) + "," + f + "," + tau);
        }
    }
    const auto dir = ensure_out_dir(cfg);
    write_lines((dir / "robustness.csv").string(), rows);
    std::printf("robustness grid %dx%d written (%zu cells)\n", cfg.grid_points, cfg.grid_points,
                rows.size() - 1);
    return (any_failure || !converged) ? kExitNotConverged : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Readout-pulse simulation and optimization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // accept --config/--seed/--out/--preset after the subcommand too

    std::string config_path, preset_flag, out_flag, waveform_flag, pulse_flag, ratios_flag;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> updates_flag, n_seeds_flag, grid_points_flag;
    std::optional<double> grid_span_flag;

    app.add_option("--config", config_path, "Flat key=value config file");
    app.add_option("--seed", seed_flag, "Base RNG seed (default 0)");
    app.add_option("--out", out_flag, "Output directory (default `out`)");
    app.add_option("--preset", preset_flag, "Device preset: kyoto or brisbane");

    CLI::App* sim = app.add_subcommand("simulate", "Simulate one pulse and report metrics");
    sim->add_option("--waveform", waveform_flag, "Pulse file to simulate");
    sim->add_option("--pulse", pulse_flag, "Named pulse: square, zero, a4r, clear");

    CLI::App* train = app.add_subcommand("train", "PPO-train readout pulses");
    train->add_option("--updates", updates_flag, "Training updates per seed (default 5000)");
    train->add_option("--n-seeds", n_seeds_flag, "Consecutive seeds to train (default 1)");

    CLI::App* sweep = app.add_subcommand("sweep-ratio", "A4R vs CLEAR across kappa/chi ratios");
    sweep->add_option("--ratios", ratios_flag, "Comma-separated ratio list");

    CLI::App* robust = app.add_subcommand("robustness", "Fixed-pulse (kappa, chi) drift grid");
    robust->add_option("--waveform", waveform_flag, "Pulse file to evaluate");
    robust->add_option("--pulse", pulse_flag, "Named pulse (default a4r)");
    robust->add_option("--grid-points", grid_points_flag, "Grid points per axis (default 11)");
    robust->add_option("--grid-span", grid_span_flag, "Fractional drift span (default 0.1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    RunConfig cfg;
    cfg.subcommand = app.get_subcommands().front()->get_name();
    try {
        if (!config_path.empty()) {
            apply_config(cfg, parse_config_file(config_path));
        }
        if (!preset_flag.empty()) {
            cfg.preset_name = preset_flag;
        }
        if (!out_flag.empty()) {
            cfg.out_dir = out_flag;
        }
        if (seed_flag) {
            cfg.seed = *seed_flag;
        }
        if (!waveform_flag.empty()) {
            cfg.waveform_path = waveform_flag;
        }
        if (!pulse_flag.empty()) {
            cfg.pulse_name = pulse_flag;
        }
        if (updates_flag) {
            cfg.ppo.updates = *updates_flag;
        }
        if (n_seeds_flag) {
            cfg.n_seeds = *n_seeds_flag;
        }
        if (grid_points_flag) {
            cfg.grid_points = *grid_points_flag;
        }
        if (grid_span_flag) {
            cfg.grid_span = *grid_span_flag;
        }
        if (sweep->count("--ratios") > 0) {
            cfg.ratios = parse_list("ratios", ratios_flag);
        }
        if (!cfg.waveform_path.empty() && !cfg.pulse_name.empty()) {
            throw ConfigError("give either `waveform` or `pulse`, not both");
        }

        if (cfg.subcommand == "simulate") {
            return cmd_simulate(cfg);
        }
        if (cfg.subcommand == "train") {
            return cmd_train(cfg);
        }
        if (cfg.subcommand == "sweep-ratio") {
            return cmd_sweep_ratio(cfg);
        }
        return cmd_robustness(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const CalibrationError& e) {
        std::fprintf(stderr, "not converged: %s\n", e.what());
        return kExitNotConverged;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
