#pragma once

// Helpers shared by the task worlds (not installed).

#include "sdbc/sim.hpp"
#include "sdbc/tasks.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace sdbc::detail {

inline std::vector<sim::Segment> square_walls(double half)
{
    return {{{-half, -half}, {half, -half}},
            {{half, -half}, {half, half}},
            {{half, half}, {-half, half}},
            {{-half, half}, {-half, -half}}};
}

inline std::vector<double> segment_props(std::span<const sim::Segment> segments)
{
    std::vector<double> data;
    for (const auto& s : segments)
        data.insert(data.end(), {s.a.x, s.a.y, s.b.x, s.b.y});
    return shape_props(Shape::segments, data);
}

/// Uniform non-overlapping placement with random headings inside
/// [lo, hi]^2 (centre coordinates), rejecting positions closer than `clearance`
/// to already placed robots or to `avoid` points.
inline std::vector<sim::RobotBody> place_robots(std::size_t count, double radius, double lo, double hi,
                                                std::mt19937_64& rng, std::span<const sim::Vec2> avoid = {},
                                                double avoid_clearance = 0.0)
{
    std::uniform_real_distribution<double> coord(lo, hi);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::vector<sim::RobotBody> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        sim::RobotBody b;
        b.radius = radius;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 10000)
                throw std::runtime_error("place_robots: could not place robots without overlap");
            b.position = {coord(rng), coord(rng)};
            bool ok = true;
            for (const auto& o : out)
                ok = ok && sim::distance(o.position, b.position) > o.radius + radius + 1e-3;
            for (const auto& p : avoid)
                ok = ok && sim::distance(p, b.position) > avoid_clearance;
            if (ok)
                break;
        }
        b.heading = angle(rng);
        out.push_back(b);
    }
    return out;
}

/// Sensor readout helper: range in [0, 1] (1 when nothing is sensed) and
/// bearing scaled to [-1, 1) (0 when nothing is sensed).
inline void write_range_bearing(const std::optional<sim::RangeBearing>& rb, double* out)
{
    out[0] = rb ? rb->range : 1.0;
    out[1] = rb ? rb->bearing / std::numbers::pi : 0.0;
}

class SensorNoise {
public:
    SensorNoise(double stddev, std::uint64_t seed) : stddev_(stddev), rng_(seed) {}

    void apply(std::span<double> inputs)
    {
        if (stddev_ <= 0.0)
            return;
        std::normal_distribution<double> n(0.0, stddev_);
        for (auto& v : inputs)
            v += n(rng_);
    }

private:
    double stddev_;
    std::mt19937_64 rng_;
};

inline void set_wheels(sim::RobotBody& body, std::span<const double> outputs)
{
    body.left = 2.0 * outputs[0] - 1.0;
    body.right = 2.0 * outputs[1] - 1.0;
}

inline void fill_robot_entity(EntityState& e, const sim::RobotBody& b, std::size_t kappa)
{
    e.theta.resize(kappa);
    e.theta[0] = b.position.x;
    e.theta[1] = b.position.y;
    e.theta[2] = b.angular_speed;
    e.theta[3] = b.linear_speed;
    if (e.props.size() != 1)
        e.props.assign(1, static_cast<double>(Shape::point));
}

inline std::uint64_t noise_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

} // namespace sdbc::detail
