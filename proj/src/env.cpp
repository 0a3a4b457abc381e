#include "goaltrack/env.hpp"

#include "goaltrack/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace goaltrack {

namespace {

constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kTargetStream = 2;

template <typename T>
std::size_t grid_index(const std::vector<T>& grid, T v, const char* axis) {
    const auto it = std::find(grid.begin(), grid.end(), v);
    if (it == grid.end()) throw std::invalid_argument(std::string("action: ") + axis + " value not on grid");
    return static_cast<std::size_t>(it - grid.begin());
}

} // namespace

void EnvConfig::validate() const {
    if (!(tti_len > 0.0)) throw std::invalid_argument("env: tti_len must be positive");
    if (n_ttis < 1) throw std::invalid_argument("env: n_ttis must be >= 1");
    if (sub_steps < 1) throw std::invalid_argument("env: sub_steps must be >= 1");
    if (!is_finite(uav_init) || !is_finite(target_init) || !is_finite(bs))
        throw std::invalid_argument("env: positions must be finite");
    if (uav_init.z < 0.0 || target_init.z < 0.0 || bs.z < 0.0)
        throw std::invalid_argument("env: altitudes must be >= 0");
    if (!(uav_init.z > bs.z)) throw std::invalid_argument("env: UAV must fly above the base station");
    if (!(value.d_th > 0.0)) throw std::invalid_argument("env: d_th must be positive");
    if (!(mobility.speed >= 0.0)) throw std::invalid_argument("env: target speed must be >= 0");
    if (!(mobility.max_turn >= 0.0)) throw std::invalid_argument("env: max_turn must be >= 0");
    if (vx_grid.empty() || vy_grid.empty() || vz_grid.empty() || k_max_choices.empty())
        throw std::invalid_argument("env: action grids must be non-empty");
    channel.validate();
    repetition.validate();
    if (std::abs(repetition.tti_len - tti_len) > 0.0)
        throw std::invalid_argument("env: repetition.tti_len must equal tti_len");
    for (int k : k_max_choices)
        if (k < 1 || k > repetition.k_cap)
            throw std::invalid_argument("env: k_max choice " + std::to_string(k) + " outside [1, k_cap]");
}

ActionSpace::ActionSpace(std::vector<double> vx, std::vector<double> vy, std::vector<double> vz, std::vector<int> k)
    : vx_(std::move(vx)), vy_(std::move(vy)), vz_(std::move(vz)), k_(std::move(k)) {
    if (vx_.empty() || vy_.empty() || vz_.empty() || k_.empty())
        throw std::invalid_argument("action space: grids must be non-empty");
}

ActionSpace::ActionSpace(const EnvConfig& cfg)
    : ActionSpace(cfg.vx_grid, cfg.vy_grid, cfg.vz_grid, cfg.k_max_choices) {}

Action ActionSpace::decode(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("action index " + std::to_string(index) + " out of range");
    const std::size_t ik = index % k_.size();
    index /= k_.size();
    const std::size_t iz = index % vz_.size();
    index /= vz_.size();
    const std::size_t iy = index % vy_.size();
    const std::size_t ix = index / vy_.size();
    return {vx_[ix], vy_[iy], vz_[iz], k_[ik]};
}

std::size_t ActionSpace::encode(const Action& a) const {
    const std::size_t ix = grid_index(vx_, a.vx, "vx");
    const std::size_t iy = grid_index(vy_, a.vy, "vy");
    const std::size_t iz = grid_index(vz_, a.vz, "vz");
    const std::size_t ik = grid_index(k_, a.k_max, "k_max");
    return ((ix * vy_.size() + iy) * vz_.size() + iz) * k_.size() + ik;
}

std::vector<Action> ActionSpace::enumerate() const {
    std::vector<Action> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(decode(i));
    return out;
}

TrackingEnv::TrackingEnv(EnvConfig cfg) : cfg_(std::move(cfg)), actions_((cfg_.validate(), cfg_)) {}

StateVec TrackingEnv::state() const {
    const Position3 d = target_.position - uav_;
    return {d.x, d.y, d.z};
}

StateVec TrackingEnv::reset(std::uint64_t seed) {
    channel_rng_ = Rng::derive(seed, kChannelStream);
    target_rng_ = Rng::derive(seed, kTargetStream);
    uav_ = cfg_.uav_init;
    target_.position = cfg_.target_init;
    target_.speed = cfg_.mobility.speed;
    target_.heading = cfg_.target_initial_heading ? *cfg_.target_initial_heading
                                                  : target_rng_.uniform(0.0, 2.0 * std::numbers::pi);
    n_ = 0;
    started_ = true;
    trace_.clear();
    return state();
}

StepResult TrackingEnv::step(const Action& action) {
    if (!started_) throw std::logic_error("step called before reset");
    if (done()) throw std::logic_error("step called after the episode finished");
    actions_.encode(action); // rejects off-grid actions

    const double T = cfg_.tti_len;
    StepResult result;
    StepInfo& info = result.info;

    info.transmission = channel_override_
                            ? run_tti_transmission(action.k_max, channel_override_, cfg_.channel, cfg_.repetition,
                                                   channel_rng_)
                            : run_tti_transmission(action.k_max, uav_, cfg_.bs, cfg_.channel, cfg_.repetition,
                                                   channel_rng_);

    // Hover until the command is decoded, then execute it to the end of the TTI.
    const VelocityCommand cmd{action.vx, action.vy, action.vz, T};
    const double activation = info.transmission.decoded ? *info.transmission.decode_offset_s : T;
    info.hover_s = activation;
    info.move_s = T - activation;

    const Position3 uav_start = uav_;
    const TargetTrajectoryState target_start = target_;
    const int L = cfg_.sub_steps;
    info.sub_distances.reserve(static_cast<std::size_t>(L));
    info.sub_values.reserve(static_cast<std::size_t>(L));
    Position3 uav_end = uav_start;
    TargetTrajectoryState target_end = target_start;
    for (int l = 1; l <= L; ++l) {
        const double t = l == L ? T : T * l / L;
        const Position3 u = step_uav(uav_start, cmd, std::max(0.0, t - activation));
        const TargetTrajectoryState g = step_target(target_start, t);
        const double d = distance(u, g.position);
        info.sub_distances.push_back(d);
        info.sub_values.push_back(value(d, cfg_.value));
        if (l == L) {
            uav_end = u;
            target_end = g;
        }
    }

    uav_ = uav_end;
    target_ = turn_target(target_end, cfg_.mobility, target_rng_);
    ++n_;

    info.d_n = distance(uav_, target_.position);
    result.reward = value(info.d_n, cfg_.value);
    result.next_state = state();
    result.done = done();

    if (tracing_)
        trace_.push_back({n_, info.transmission.attempts_used, info.transmission.decoded, info.d_n, result.reward,
                          uav_, target_.position});
    return result;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
    os << "n,j_used,decoded,d_n,reward,uav_x,uav_y,uav_z,target_x,target_y,target_z\n";
    for (const auto& r : rows) {
        os << r.n << ',' << r.j_used << ',' << (r.decoded ? 1 : 0) << ',' << format_double(r.d_n) << ','
           << format_double(r.reward) << ',' << format_double(r.uav.x) << ',' << format_double(r.uav.y) << ','
           << format_double(r.uav.z) << ',' << format_double(r.target.x) << ',' << format_double(r.target.y)
           << ',' << format_double(r.target.z) << '\n';
    }
}

} // namespace goaltrack
