#include "goaltrack/agents.hpp"

#include "goaltrack/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace goaltrack {

namespace {

constexpr std::uint64_t kInitStream = 10;
constexpr std::uint64_t kExploreStream = 11;
constexpr std::uint64_t kReplayStream = 12;
constexpr std::uint64_t kEpisodeStream = 13;
constexpr double kLossSmoothing = 0.01;

} // namespace

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay memory: capacity must be positive");
}

void ReplayMemory::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayMemory::sample(std::size_t count, Rng& rng) const {
    if (count > items_.size()) throw std::invalid_argument("replay memory: not enough transitions to sample");
    // Floyd's subset sampling.
    const std::size_t n = items_.size();
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t j = n - count; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.index(j + 1));
        picked.push_back(std::find(picked.begin(), picked.end(), t) == picked.end() ? t : j);
    }
    std::vector<Transition> out;
    out.reserve(count);
    for (std::size_t i : picked) out.push_back(items_[i]);
    return out;
}

void TrainConfig::validate() const {
    if (n_iterations < 1) throw std::invalid_argument("train: n_iterations must be >= 1");
    if (target_sync_episodes < 1) throw std::invalid_argument("train: target_sync_episodes must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("train: gamma must be in (0, 1]");
    for (double e : {epsilon_start, epsilon_end})
        if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("train: epsilon must be in [0, 1]");
    if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0))
        throw std::invalid_argument("train: epsilon_decay_fraction must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
    if (!(rms_decay > 0.0 && rms_decay < 1.0)) throw std::invalid_argument("train: rms_decay must be in (0, 1)");
    if (!(rms_eps > 0.0)) throw std::invalid_argument("train: rms_eps must be positive");
    if (static_cast<std::size_t>(batch_size) > replay_capacity)
        throw std::invalid_argument("train: batch_size exceeds replay_capacity");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("train: hidden layer sizes must be positive");
}

double TrainConfig::epsilon(int episode) const {
    const double horizon = epsilon_decay_fraction * n_iterations;
    const double frac = std::min(1.0, static_cast<double>(episode) / horizon);
    return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

std::size_t argmax(const Eigen::VectorXd& q) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i)
        if (q(i) > q(best)) best = i;
    return static_cast<std::size_t>(best);
}

std::size_t select_action(const QNetParams& qnet, std::span<const double> state, double epsilon, Rng& rng) {
    const double p = rng.uniform();
    if (p < epsilon) return static_cast<std::size_t>(rng.index(static_cast<std::uint64_t>(qnet.output_size())));
    return argmax(forward(qnet, state));
}

DqnLearner::DqnLearner(int state_size, int action_count, const TrainConfig& tc)
    : tc_(tc), memory_(tc.replay_capacity) {
    tc_.validate();
    std::vector<int> sizes{state_size};
    sizes.insert(sizes.end(), tc_.hidden.begin(), tc_.hidden.end());
    sizes.push_back(action_count);
    Rng init = Rng::derive(tc_.seed, kInitStream);
    online_ = QNetParams::glorot(sizes, init);
    target_ = online_;
    opt_ = OptimState::for_params(online_, tc_.learning_rate, tc_.rms_decay, tc_.rms_eps);
    explore_rng_ = Rng::derive(tc_.seed, kExploreStream);
    replay_rng_ = Rng::derive(tc_.seed, kReplayStream);
}

std::size_t DqnLearner::act(std::span<const double> state, double epsilon) {
    return select_action(online_, state, epsilon, explore_rng_);
}

std::optional<double> DqnLearner::observe(Transition t) {
    memory_.push(std::move(t));
    const auto batch_size = static_cast<std::size_t>(tc_.batch_size);
    if (memory_.size() < batch_size) return std::nullopt;
    const std::vector<Transition> batch = memory_.sample(batch_size, replay_rng_);
    td_loss_grad(batch, online_, target_, tc_.gamma, workspace_, step_);
    rmsprop_step(online_, step_.grads, opt_);
    ++updates_;
    return step_.loss;
}

std::uint64_t training_episode_seed(std::uint64_t seed, int episode) {
    return Rng::derive(seed, kEpisodeStream + (static_cast<std::uint64_t>(episode) << 8)).next_u64();
}

TrainResult train(const EnvConfig& env_cfg, const TrainConfig& tc, const TrainHooks& hooks) {
    tc.validate();
    TrackingEnv env(env_cfg);
    DqnLearner learner(3, static_cast<int>(env.actions().size()), tc);

    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(tc.n_iterations));
    double loss_avg = std::numeric_limits<double>::quiet_NaN();
    for (int episode = 0; episode < tc.n_iterations; ++episode) {
        const double eps = tc.epsilon(episode);
        StateVec s = env.reset(training_episode_seed(tc.seed, episode));
        double ret = 0.0;
        for (int n = 0; !env.done(); ++n) {
            const auto sa = s.as_array();
            const std::size_t a = learner.act(sa, eps);
            const StepResult r = env.step(a);
            ret += r.reward;
            const auto sn = r.next_state.as_array();
            const auto loss = learner.observe(
                {std::vector<double>(sa.begin(), sa.end()), a, r.reward, std::vector<double>(sn.begin(), sn.end()),
                 r.done});
            if (loss) loss_avg = std::isnan(loss_avg) ? *loss : loss_avg + kLossSmoothing * (*loss - loss_avg);
            s = r.next_state;
            if (hooks.after_step) hooks.after_step(episode, n, learner);
        }
        if ((episode + 1) % tc.target_sync_episodes == 0) learner.sync_target();
        result.log.push_back({episode, eps, ret, loss_avg});
        if (hooks.after_episode) hooks.after_episode(episode, learner);
    }
    result.params = learner.online();
    result.optimizer = learner.optimizer();
    return result;
}

void write_train_log_csv(std::ostream& os, const std::vector<EpisodeLog>& log) {
    os << "episode,epsilon,return,loss\n";
    for (const auto& e : log)
        os << e.episode << ',' << format_double(e.epsilon) << ',' << format_double(e.episode_return) << ','
           << format_double(e.loss) << '\n';
}

void PidConfig::validate() const {
    if (!(kp > 0.0)) throw std::invalid_argument("pid: kp must be positive");
    if (k_max < 1) throw std::invalid_argument("pid: k_max must be >= 1");
}

double snap_to_grid(double v, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("snap_to_grid: empty grid");
    double best = grid.front();
    double best_err = std::abs(v - best);
    for (double g : grid) {
        const double err = std::abs(v - g);
        if (err < best_err || (err == best_err && std::abs(g) < std::abs(best))) {
            best = g;
            best_err = err;
        }
    }
    return best;
}

Action pid_command(const Position3& p_u, const Position3& p_tg, const PidConfig& pc, double tti_len,
                   const ActionSpace& space) {
    if (!(tti_len > 0.0)) throw std::invalid_argument("pid_command: tti_len must be positive");
    const auto& ks = space.k_choices();
    if (std::find(ks.begin(), ks.end(), pc.k_max) == ks.end())
        throw std::invalid_argument("pid_command: k_max " + std::to_string(pc.k_max) + " not in the action space");
    const Position3 err = p_tg - p_u;
    const double gain = pc.kp / tti_len;
    return {snap_to_grid(gain * err.x, space.vx()), snap_to_grid(gain * err.y, space.vy()),
            snap_to_grid(gain * err.z, space.vz()), pc.k_max};
}

} // namespace goaltrack
