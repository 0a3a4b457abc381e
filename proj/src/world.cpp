#include "goaltrack/world.hpp"

#include <cmath>

namespace goaltrack {

double distance(const Position3& a, const Position3& b) {
    const Position3 d = a - b;
    return std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
}

int sign(double x) { return x >= 0.0 ? 1 : -1; }

double value(double d, const ValueParams& params) {
    // Closed form of (1 - f(d_th - d)) * (e^(d_th - d) - 2) / 2 + 1.
    const double gap = params.d_th - d;
    const int f = sign(gap);
    if (f == 1) return 1.0;
    return std::expm1(gap);
}

Position3 step_uav(const Position3& p, const VelocityCommand& cmd, double dt) {
    return {p.x + cmd.vx * dt, p.y + cmd.vy * dt, p.z + cmd.vz * dt};
}

TargetTrajectoryState step_target(const TargetTrajectoryState& s, double dt) {
    TargetTrajectoryState out = s;
    const double step = s.speed * dt;
    out.position.x += step * std::cos(s.heading);
    out.position.y += step * std::sin(s.heading);
    return out;
}

TargetTrajectoryState turn_target(const TargetTrajectoryState& s, const TargetMobility& mobility, Rng& rng) {
    TargetTrajectoryState out = s;
    out.heading = s.heading + rng.uniform(-mobility.max_turn, mobility.max_turn);
    return out;
}

bool is_finite(const Position3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

} // namespace goaltrack
