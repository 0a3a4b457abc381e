#pragma once

#include "goaltrack/agents.hpp"
#include "goaltrack/config.hpp"
#include "goaltrack/env.hpp"
#include "goaltrack/qnet.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace goaltrack {

/// Chooses the action for the current TTI from the environment's observable state.
using Policy = std::function<Action(const TrackingEnv&)>;

Policy make_pid_policy(const PidConfig& pc);
/// Greedy Q-network policy. The network output must match the environment's action space.
Policy make_qnet_policy(QNetParams params);

/// TTI-end distances of one evaluation episode.
struct Rollout {
    std::uint64_t seed = 0;
    std::vector<double> d_n;
};

struct RunMetrics {
    std::uint64_t seed = 0;
    double p_success = 0.0;
    double mean_distance = 0.0;
    double episode_return = 0.0;
};

struct Metrics {
    double d_th = 0.0;
    double p_success = 0.0;
    double mean_distance = 0.0;
    double mean_episode_return = 0.0;
    std::vector<RunMetrics> runs;
};

/// Runs `runs` episodes with seeds master_seed + i.
std::vector<Rollout> rollouts(const Policy& policy, const EnvConfig& env_cfg, std::uint64_t master_seed, int runs);

/// Success is counted on TTI-end distances: d_n <= d_th.
Metrics metrics_at(const std::vector<Rollout>& runs, double d_th);

/// Evaluates at the configured threshold env.d_th.
Metrics evaluate(const Policy& policy, const ExperimentConfig& cfg);

void write_metrics_csv(std::ostream& os, const std::string& policy_name, const std::vector<Metrics>& rows);
void write_runs_csv(std::ostream& os, const Metrics& m);

struct SweepRow {
    std::string variant;
    double d_th = 0.0;
    double p_success = 0.0;
    double mean_distance = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int pid_k_best = 1;
    std::vector<double> pid_k_scan; // p_success at env.d_th for each k in env.k_max_choices
    QNetParams deepp_k1;
    QNetParams deepp_kopt;
    std::vector<EpisodeLog> deepp_k1_log;
    std::vector<EpisodeLog> deepp_kopt_log;

    double p_success(const std::string& variant, double d_th) const;
};

inline constexpr const char* kVariantPidK1 = "pid_k1";
inline constexpr const char* kVariantPidKBest = "pid_kbest";
inline constexpr const char* kVariantDeepPK1 = "deepp_k1";
inline constexpr const char* kVariantDeepPKOpt = "deepp_kopt";

/// Environment restricted to a single repetition count.
EnvConfig with_fixed_k(EnvConfig env, int k);

/// Trains both DeepP variants, picks PID's best K on the shared seed set, and
/// evaluates all four variants at every threshold of the sweep.
SweepResult sweep_threshold(const ExperimentConfig& cfg);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

} // namespace goaltrack
