#pragma once

// Fixed-timestep 2D kinematic simulation of circular differential-drive robots
// among wall segments.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace sdbc::sim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
    friend Vec2 operator*(double s, Vec2 a) noexcept { return {a.x * s, a.y * s}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

/// Wraps an angle into [-pi, pi).
double normalize_angle(double a) noexcept;

struct RobotBody {
    Vec2 position;
    double heading = 0.0; // radians, [-pi, pi)
    double radius = 0.05;
    double left = 0.0;    // wheel commands in [-1, 1]
    double right = 0.0;
    double linear_speed = 0.0;  // m/s over the last step
    double angular_speed = 0.0; // rad/s over the last step
    bool active = true;         // inactive bodies are ignored by collisions
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

struct Arena {
    std::vector<Segment> walls;
    Vec2 min{-1.0, -1.0};
    Vec2 max{1.0, 1.0};

    double diagonal() const noexcept { return distance(min, max); }
};

Vec2 closest_point(Vec2 p, const Segment& s) noexcept;
double point_segment_distance(Vec2 p, const Segment& s) noexcept;

/// Differential-drive update with constant wheel commands over dt (exact arc).
/// Linear speed v_max (l + r) / 2, angular speed v_max (r - l) / axle. Commands
/// are clamped to [-1, 1]; axle <= 0 means 2 * radius.
RobotBody step_kinematics(RobotBody body, double dt, double v_max, double axle = 0.0);

/// Pushes apart overlapping robot pairs (equally, along the centre line; +x for
/// coincident centres) and pushes robots out of walls, iterating until no
/// overlap remains. Positions are finally clamped to the arena box.
void resolve_collisions(std::span<RobotBody> bodies, const Arena& arena, int max_iterations = 64);

struct RangeBearing {
    double range = 0.0;   // distance / max_range, in [0, 1]
    double bearing = 0.0; // relative to heading, [-pi, pi)
};

/// nullopt beyond max_range.
std::optional<RangeBearing> sense_range_bearing(const RobotBody& observer, Vec2 target, double max_range) noexcept;

} // namespace sdbc::sim
