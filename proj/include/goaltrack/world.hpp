#pragma once

#include "goaltrack/rng.hpp"

namespace goaltrack {

/// Cartesian position in meters. The base station sits at the origin by default.
struct Position3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Position3&, const Position3&) = default;
};

inline Position3 operator-(const Position3& a, const Position3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Position3 operator+(const Position3& a, const Position3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

/// Velocity command carried in one C&C packet: m/s per axis, executed for exec_duration seconds.
struct VelocityCommand {
    double vx = 0.0;
    double vy = 0.0;
    double vz = 0.0;
    double exec_duration = 1e-3;
};

struct TargetTrajectoryState {
    Position3 position;
    double heading = 0.0; // radians, x-y plane
    double speed = 0.0;   // m/s
};

/// Random-direction mobility: constant speed, heading perturbed uniformly
/// within +/- max_turn at every TTI boundary, constant altitude.
struct TargetMobility {
    double speed = 1000.0;
    double max_turn = 0.7853981633974483;
};

struct ValueParams {
    double d_th = 2.0;
};

double distance(const Position3& a, const Position3& b);

/// 1 for x >= 0, -1 otherwise.
int sign(double x);

/// Tracking value of a UAV-target distance: 1 inside the threshold,
/// e^(d_th - d) - 1 in (-1, 0) outside.
double value(double d, const ValueParams& params);

Position3 step_uav(const Position3& p, const VelocityCommand& cmd, double dt);

/// Straight-line advance along the current heading. Heading and z are untouched.
TargetTrajectoryState step_target(const TargetTrajectoryState& s, double dt);

/// Heading update applied at a TTI boundary.
TargetTrajectoryState turn_target(const TargetTrajectoryState& s, const TargetMobility& mobility, Rng& rng);

bool is_finite(const Position3& p);

} // namespace goaltrack
