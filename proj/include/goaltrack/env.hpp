#pragma once

#include "goaltrack/channel.hpp"
#include "goaltrack/repetition.hpp"
#include "goaltrack/rng.hpp"
#include "goaltrack/world.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace goaltrack {

struct EnvConfig {
    double tti_len = 1e-3;
    int n_ttis = 100;
    int sub_steps = 10;
    Position3 uav_init{69.0, 70.0, 50.0};
    Position3 target_init{70.0, 70.0, 50.0};
    Position3 bs{0.0, 0.0, 0.0};
    // Flight disk radius and height; descriptive only, never enforced.
    double disk_radius = 200.0;
    double height = 50.0;
    ValueParams value;
    ChannelParams channel;
    RepetitionConfig repetition;
    TargetMobility mobility;
    std::optional<double> target_initial_heading; // uniform in [0, 2pi) when unset
    std::vector<double> vx_grid{-2000, -1500, -1000, -500, 0, 500, 1000, 1500, 2000};
    std::vector<double> vy_grid{-2000, -1500, -1000, -500, 0, 500, 1000, 1500, 2000};
    std::vector<double> vz_grid{0};
    std::vector<int> k_max_choices{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    void validate() const;
};

/// Target-minus-UAV position difference at a TTI start.
struct StateVec {
    double dx = 0.0;
    double dy = 0.0;
    double dz = 0.0;

    std::array<double, 3> as_array() const { return {dx, dy, dz}; }
    friend bool operator==(const StateVec&, const StateVec&) = default;
};

struct Action {
    double vx = 0.0;
    double vy = 0.0;
    double vz = 0.0;
    int k_max = 1;

    friend bool operator==(const Action&, const Action&) = default;
};

/// Lexicographic enumeration (vx, vy, vz, k_max) of the discrete action grid.
class ActionSpace {
public:
    ActionSpace(std::vector<double> vx, std::vector<double> vy, std::vector<double> vz, std::vector<int> k);
    explicit ActionSpace(const EnvConfig& cfg);

    std::size_t size() const { return vx_.size() * vy_.size() * vz_.size() * k_.size(); }
    Action decode(std::size_t index) const;
    /// Throws std::invalid_argument if any component is off-grid.
    std::size_t encode(const Action& a) const;
    std::vector<Action> enumerate() const;

    const std::vector<double>& vx() const { return vx_; }
    const std::vector<double>& vy() const { return vy_; }
    const std::vector<double>& vz() const { return vz_; }
    const std::vector<int>& k_choices() const { return k_; }

private:
    std::vector<double> vx_, vy_, vz_;
    std::vector<int> k_;
};

struct StepInfo {
    TtiOutcome transmission;
    double d_n = 0.0;
    double hover_s = 0.0; // [0, decode) with no valid command
    double move_s = 0.0;  // [decode, T] executing the command
    std::vector<double> sub_distances; // d_{n,l}, l = 1..L
    std::vector<double> sub_values;    // V(d_{n,l})
};

struct StepResult {
    StateVec next_state;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

struct TraceRow {
    int n = 0;
    int j_used = 0;
    bool decoded = false;
    double d_n = 0.0;
    double reward = 0.0;
    Position3 uav;
    Position3 target;
};

/// One episode of the tracking task. Not thread-safe; use one instance per thread.
class TrackingEnv {
public:
    explicit TrackingEnv(EnvConfig cfg);

    StateVec reset(std::uint64_t seed);
    StepResult step(const Action& action);
    StepResult step(std::size_t action_index) { return step(actions_.decode(action_index)); }

    const EnvConfig& config() const { return cfg_; }
    const ActionSpace& actions() const { return actions_; }
    StateVec state() const;
    const Position3& uav() const { return uav_; }
    const TargetTrajectoryState& target() const { return target_; }
    int tti() const { return n_; }
    bool done() const { return n_ >= cfg_.n_ttis; }

    void enable_trace(bool on) { tracing_ = on; }
    const std::vector<TraceRow>& trace() const { return trace_; }

    /// Replaces the air-to-ground channel with a custom attempt sampler.
    void override_channel(AttemptSampler sampler) { channel_override_ = std::move(sampler); }

private:
    EnvConfig cfg_;
    ActionSpace actions_;
    Rng channel_rng_;
    Rng target_rng_;
    Position3 uav_;
    TargetTrajectoryState target_;
    int n_ = 0;
    bool started_ = false;
    bool tracing_ = false;
    std::vector<TraceRow> trace_;
    AttemptSampler channel_override_;
};

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);

} // namespace goaltrack
