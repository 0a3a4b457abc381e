#pragma once

#include "goaltrack/env.hpp"
#include "goaltrack/qnet.hpp"
#include "goaltrack/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace goaltrack {

/// Bounded ring of transitions; the oldest entry is overwritten when full.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// `count` distinct entries, uniformly at random. Requires size() >= count.
    std::vector<Transition> sample(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

struct TrainConfig {
    int n_iterations = 2000;       // episodes
    int target_sync_episodes = 10; // copy theta into theta* every this many episodes
    int batch_size = 32;
    double gamma = 0.1;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_decay_fraction = 0.8; // share of episodes over which epsilon decays linearly
    double learning_rate = 1e-4;
    double rms_decay = 0.99;
    double rms_eps = 1e-8;
    std::size_t replay_capacity = 100000;
    std::vector<int> hidden{128, 128};
    std::uint64_t seed = 1;

    void validate() const;
    double epsilon(int episode) const;
};

/// Epsilon-greedy choice. A uniform draw decides exploration; the greedy branch
/// takes the first index of the maximum Q-value.
std::size_t select_action(const QNetParams& qnet, std::span<const double> state, double epsilon, Rng& rng);

/// Index of the first maximum.
std::size_t argmax(const Eigen::VectorXd& q);

/// Online/target network pair with replay and RMSprop, independent of any environment.
class DqnLearner {
public:
    DqnLearner(int state_size, int action_count, const TrainConfig& tc);

    std::size_t act(std::span<const double> state, double epsilon);

    /// Stores the transition; once the memory holds a full batch, samples one and
    /// takes an RMSprop step. Returns the batch loss when an update happened.
    std::optional<double> observe(Transition t);

    void sync_target() { target_ = online_; }

    const QNetParams& online() const { return online_; }
    const QNetParams& target() const { return target_; }
    const OptimState& optimizer() const { return opt_; }
    const ReplayMemory& memory() const { return memory_; }
    std::size_t updates() const { return updates_; }

private:
    TrainConfig tc_;
    QNetParams online_;
    QNetParams target_;
    OptimState opt_;
    ReplayMemory memory_;
    Rng explore_rng_;
    Rng replay_rng_;
    std::size_t updates_ = 0;
    TdWorkspace workspace_;
    TdLossGrad step_;
};

struct EpisodeLog {
    int episode = 0;
    double epsilon = 0.0;
    double episode_return = 0.0;
    double loss = 0.0; // exponential moving average of batch loss; NaN before the first update
};

struct TrainHooks {
    std::function<void(int episode, int tti, const DqnLearner&)> after_step;
    std::function<void(int episode, const DqnLearner&)> after_episode;
};

struct TrainResult {
    QNetParams params;
    OptimState optimizer;
    std::vector<EpisodeLog> log;
};

/// Seed of the environment for training episode `episode`.
std::uint64_t training_episode_seed(std::uint64_t seed, int episode);

/// Deep Q-learning over the tracking environment, one update per TTI.
TrainResult train(const EnvConfig& env_cfg, const TrainConfig& tc, const TrainHooks& hooks = {});

void write_train_log_csv(std::ostream& os, const std::vector<EpisodeLog>& log);

struct PidConfig {
    double kp = 0.5;
    int k_max = 1;

    void validate() const;
};

/// Nearest grid value; equidistant candidates resolve toward zero.
double snap_to_grid(double v, const std::vector<double>& grid);

/// Proportional controller on the position error, snapped onto the action grid
/// with a fixed repetition count.
Action pid_command(const Position3& p_u, const Position3& p_tg, const PidConfig& pc, double tti_len,
                   const ActionSpace& space);

} // namespace goaltrack
