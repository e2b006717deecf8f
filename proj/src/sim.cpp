#include "sdbc/sim.hpp"

#include <algorithm>

namespace sdbc::sim {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double separation_slack = 1e-9;
} // namespace

double normalize_angle(double a) noexcept
{
    a -= two_pi * std::floor((a + std::numbers::pi) / two_pi);
    // guard against rounding landing exactly on +pi
    if (a >= std::numbers::pi)
        a -= two_pi;
    return a;
}

Vec2 closest_point(Vec2 p, const Segment& s) noexcept
{
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    if (len2 <= 0.0)
        return s.a;
    const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return s.a + d * t;
}

double point_segment_distance(Vec2 p, const Segment& s) noexcept
{
    return distance(p, closest_point(p, s));
}

RobotBody step_kinematics(RobotBody body, double dt, double v_max, double axle)
{
    if (axle <= 0.0)
        axle = 2.0 * body.radius;
    const double l = std::clamp(body.left, -1.0, 1.0);
    const double r = std::clamp(body.right, -1.0, 1.0);
    const double v = v_max * (l + r) / 2.0;
    const double w = v_max * (r - l) / axle;
    const double h0 = body.heading;
    if (std::abs(w) < 1e-12) {
        body.position += Vec2{std::cos(h0), std::sin(h0)} * (v * dt);
    }
    else {
        const double h1 = h0 + w * dt;
        body.position += Vec2{(std::sin(h1) - std::sin(h0)) * v / w, -(std::cos(h1) - std::cos(h0)) * v / w};
    }
    body.heading = normalize_angle(h0 + w * dt);
    body.linear_speed = v;
    body.angular_speed = w;
    return body;
}

void resolve_collisions(std::span<RobotBody> bodies, const Arena& arena, int max_iterations)
{
    const std::size_t n = bodies.size();
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!bodies[i].active)
                continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!bodies[j].active)
                    continue;
                const Vec2 d = bodies[j].position - bodies[i].position;
                const double dist = norm(d);
                const double min_dist = bodies[i].radius + bodies[j].radius;
                if (dist >= min_dist)
                    continue;
                const Vec2 normal = dist > 1e-12 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
                const double push = (min_dist - dist) / 2.0 + separation_slack;
                bodies[i].position -= normal * push;
                bodies[j].position += normal * push;
                moved = true;
            }
        }
        for (auto& body : bodies) {
            if (!body.active)
                continue;
            for (const auto& wall : arena.walls) {
                const Vec2 cp = closest_point(body.position, wall);
                const Vec2 d = body.position - cp;
                const double dist = norm(d);
                if (dist >= body.radius)
                    continue;
                Vec2 normal;
                if (dist > 1e-12) {
                    normal = d * (1.0 / dist);
                }
                else {
                    const Vec2 t = wall.b - wall.a;
                    const double len = norm(t);
                    normal = len > 0.0 ? Vec2{-t.y / len, t.x / len} : Vec2{1.0, 0.0};
                }
                body.position = cp + normal * (body.radius + separation_slack);
                moved = true;
            }
        }
        if (!moved)
            break;
    }
    for (auto& body : bodies) {
        if (!body.active)
            continue;
        body.position.x = std::clamp(body.position.x, arena.min.x + body.radius, arena.max.x - body.radius);
        body.position.y = std::clamp(body.position.y, arena.min.y + body.radius, arena.max.y - body.radius);
    }
}

std::optional<RangeBearing> sense_range_bearing(const RobotBody& observer, Vec2 target, double max_range) noexcept
{
    const Vec2 d = target - observer.position;
    const double dist = norm(d);
    if (dist > max_range)
        return std::nullopt;
    RangeBearing rb;
    rb.range = dist / max_range;
    rb.bearing = dist > 0.0 ? normalize_angle(std::atan2(d.y, d.x) - observer.heading) : 0.0;
    return rb;
}

} // namespace sdbc::sim
