#include "goaltrack/agents.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>
#include <set>

using namespace goaltrack;

namespace {

Transition tagged(double tag) { return {{tag, 0.0, 0.0}, 0, tag, {0.0, 0.0, 0.0}, false}; }

QNetParams bias_only(const std::vector<double>& q) {
    auto net = QNetParams::zeros({3, static_cast<int>(q.size())});
    for (std::size_t i = 0; i < q.size(); ++i) net.layers[0].b(static_cast<Eigen::Index>(i)) = q[i];
    return net;
}

TrainConfig small_train(int episodes) {
    TrainConfig tc;
    tc.n_iterations = episodes;
    tc.hidden = {16};
    tc.target_sync_episodes = 3;
    tc.replay_capacity = 150;
    tc.seed = 5;
    return tc;
}

EnvConfig short_env() {
    EnvConfig cfg;
    cfg.n_ttis = 20;
    return cfg;
}

} // namespace

TEST_CASE("replay memory is a bounded ring") {
    ReplayMemory mem(5);
    for (int i = 0; i < 12; ++i) {
        mem.push(tagged(i));
        CHECK(mem.size() == std::min(i + 1, 5));
    }
    Rng rng(1);
    const auto all = mem.sample(5, rng);
    std::set<double> tags;
    for (const auto& t : all) tags.insert(t.reward);
    CHECK(tags == std::set<double>{7, 8, 9, 10, 11});
    CHECK_THROWS_AS(mem.sample(6, rng), std::invalid_argument);
}

TEST_CASE("replay sampling is uniform and without replacement") {
    ReplayMemory mem(20);
    for (int i = 0; i < 20; ++i) mem.push(tagged(i));
    Rng rng(9);
    std::vector<int> counts(20, 0);
    const int rounds = 20000;
    for (int r = 0; r < rounds; ++r) {
        const auto batch = mem.sample(8, rng);
        std::set<double> seen;
        for (const auto& t : batch) {
            CHECK(seen.insert(t.reward).second);
            ++counts[static_cast<std::size_t>(t.reward)];
        }
    }
    // Each item appears with probability 8/20 per draw.
    const double expected = rounds * 8.0 / 20.0;
    const double sigma = std::sqrt(rounds * 0.4 * 0.6);
    for (int c : counts) CHECK(std::abs(c - expected) < 5.0 * sigma);
}

TEST_CASE("greedy selection") {
    Rng rng(1);
    std::vector<double> q(10, 0.0);
    q[7] = 1.0;
    CHECK(select_action(bias_only(q), std::array<double, 3>{0, 0, 0}, 0.0, rng) == 7);
    std::vector<double> tie(10, -1.0);
    tie[2] = tie[5] = 0.5;
    CHECK(select_action(bias_only(tie), std::array<double, 3>{0, 0, 0}, 0.0, rng) == 2);
}

TEST_CASE("argmax is invariant under increasing transforms") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd q(50);
        for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = rng.uniform(-3, 3);
        const std::size_t a = argmax(q);
        CHECK(argmax(q.array().exp().matrix()) == a);
        CHECK(argmax((3.0 * q.array() + 1.0).matrix()) == a);
        CHECK(argmax(q.array().cube().matrix()) == a);
    }
}

TEST_CASE("full exploration is uniform over the action space") {
    Rng rng(2024);
    const auto net = QNetParams::zeros({3, 810});
    const int draws = 100000;
    std::vector<int> counts(810, 0);
    for (int i = 0; i < draws; ++i) ++counts[select_action(net, std::array<double, 3>{1, 0, 0}, 1.0, rng)];
    const double p = 1.0 / 810.0;
    const double expected = draws * p;
    const double sigma = std::sqrt(draws * p * (1.0 - p));
    double chi2 = 0.0;
    int outside_3sigma = 0;
    for (int c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
        outside_3sigma += std::abs(c - expected) > 3.0 * sigma ? 1 : 0;
        CHECK(std::abs(c - expected) < 5.0 * sigma);
    }
    // 809 degrees of freedom: the 0.999 quantile is about 960.
    CHECK(chi2 < 960.0);
    // About 0.27% of bins land outside 3 sigma by chance (~2 of 810).
    CHECK(outside_3sigma <= 10);
}

TEST_CASE("epsilon schedule") {
    TrainConfig tc;
    tc.n_iterations = 100;
    CHECK(tc.epsilon(0) == 1.0);
    CHECK(tc.epsilon(40) == doctest::Approx(1.0 - 0.95 * 0.5));
    CHECK(tc.epsilon(80) == doctest::Approx(0.05));
    CHECK(tc.epsilon(99) == doctest::Approx(0.05));
    for (int e = 0; e < 100; ++e) {
        CHECK(tc.epsilon(e) >= 0.0);
        CHECK(tc.epsilon(e) <= 1.0);
    }
}

TEST_CASE("train config validation") {
    TrainConfig tc;
    CHECK_NOTHROW(tc.validate());
    tc.gamma = 0.0;
    CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
    tc = TrainConfig{};
    tc.batch_size = 64;
    tc.replay_capacity = 10;
    CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
}

TEST_CASE("training invariants") {
    const TrainConfig tc = small_train(12);
    QNetParams initial;
    QNetParams synced;
    std::size_t max_size = 0;
    bool first = true;
    TrainHooks hooks;
    hooks.after_step = [&](int, int, const DqnLearner& l) {
        if (first) {
            initial = l.target(); // target still holds the initial weights
            synced = l.target();
            first = false;
        }
        max_size = std::max(max_size, l.memory().size());
        if (l.memory().size() < static_cast<std::size_t>(tc.batch_size)) {
            CHECK(l.updates() == 0);
            CHECK(l.online() == initial);
        }
        CHECK(l.target() == synced); // frozen between syncs
    };
    hooks.after_episode = [&](int episode, const DqnLearner& l) {
        if ((episode + 1) % tc.target_sync_episodes == 0) {
            CHECK(l.target() == l.online());
            synced = l.target();
        } else {
            CHECK(l.target() == synced);
        }
    };
    const TrainResult r = train(short_env(), tc, hooks);
    CHECK(max_size == tc.replay_capacity);
    CHECK(r.log.size() == 12);
    CHECK(std::isnan(r.log.front().loss)); // no update before a full batch
    CHECK(std::isfinite(r.log.back().loss));
    CHECK(r.params.all_finite());
}

TEST_CASE("training is deterministic for a fixed seed") {
    const TrainConfig tc = small_train(4);
    const TrainResult a = train(short_env(), tc);
    const TrainResult b = train(short_env(), tc);
    CHECK(checksum(a.params) == checksum(b.params));
    CHECK(a.params == b.params);
    TrainConfig other = tc;
    other.seed = 6;
    CHECK(checksum(train(short_env(), other).params) != checksum(a.params));
}

TEST_CASE("learns to hold position on a solvable task") {
    // Stationary target and an effectively lossless link: staying put earns
    // the maximum return N, which a greedy oracle attains.
    EnvConfig env;
    env.mobility.speed = 0.0;
    env.channel.tx_power_dbm = 100.0;
    env.n_ttis = 50;
    {
        TrackingEnv oracle(env);
        oracle.reset(1);
        double ret = 0.0;
        while (!oracle.done()) {
            const StateVec s = oracle.state();
            Action a{snap_to_grid(s.dx / env.tti_len, env.vx_grid), snap_to_grid(s.dy / env.tti_len, env.vy_grid), 0, 1};
            ret += oracle.step(a).reward;
        }
        CHECK(ret == env.n_ttis);
    }
    TrainConfig tc;
    tc.n_iterations = 100;
    tc.epsilon_end = 0.01;
    tc.hidden = {64, 64};
    tc.learning_rate = 1e-3;
    tc.seed = 3;
    const TrainResult r = train(env, tc);
    const auto tail = static_cast<std::ptrdiff_t>(r.log.size() / 10);
    double mean = 0.0;
    for (auto it = r.log.end() - tail; it != r.log.end(); ++it) mean += it->episode_return;
    mean /= static_cast<double>(tail);
    CHECK(mean >= 0.95 * env.n_ttis);
}

TEST_CASE("proportional controller") {
    const ActionSpace space(EnvConfig{});
    const PidConfig pc{0.5, 1};
    const double T = 1e-3;
    CHECK(pid_command({69, 70, 50}, {70, 70, 50}, pc, T, space) == Action{500, 0, 0, 1});
    CHECK(pid_command({69, 70, 50}, {69, 70, 50}, pc, T, space) == Action{0, 0, 0, 1});
    CHECK(pid_command({60, 70, 50}, {70, 70, 50}, pc, T, space) == Action{2000, 0, 0, 1});
    CHECK(pid_command({70, 70, 50}, {60, 71, 50}, pc, T, space) == Action{-2000, 500, 0, 1});
    // 250 m/s sits halfway between 0 and 500: resolved toward zero.
    CHECK(pid_command({0, 0, 50}, {0.5, -0.5, 50}, pc, T, space) == Action{0, 0, 0, 1});
    CHECK(pid_command({0, 0, 50}, {1.5, 0, 50}, pc, T, space).vx == 500.0);
    CHECK_THROWS_AS(pid_command({0, 0, 50}, {1, 0, 50}, PidConfig{0.5, 11}, T, space), std::invalid_argument);
}

TEST_CASE("proportional controller output is always in the action space") {
    const ActionSpace space(EnvConfig{});
    Rng rng(10);
    for (int i = 0; i < 2000; ++i) {
        const Position3 u{rng.uniform(-10, 10), rng.uniform(-10, 10), 50};
        const Position3 g{rng.uniform(-10, 10), rng.uniform(-10, 10), 50};
        const PidConfig pc{0.5, 1 + static_cast<int>(rng.index(10))};
        CHECK_NOTHROW(space.encode(pid_command(u, g, pc, 1e-3, space)));
    }
}

TEST_CASE("snap_to_grid") {
    const std::vector<double> grid{-2000, -1500, -1000, -500, 0, 500, 1000, 1500, 2000};
    CHECK(snap_to_grid(260, grid) == 500);
    CHECK(snap_to_grid(250, grid) == 0);
    CHECK(snap_to_grid(-250, grid) == 0);
    CHECK(snap_to_grid(-750, grid) == -500);
    CHECK(snap_to_grid(1e9, grid) == 2000);
    CHECK(snap_to_grid(-1e9, grid) == -2000);
}
