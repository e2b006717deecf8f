#include "sdbc/tasks.hpp"

#include "world_util.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace sdbc {

namespace {

enum Group : std::size_t { agents = 0, gate = 1, walls = 2 };

// Arena [-h, h]^2 with the gate centred in the top wall (y = h). Robots whose
// centre crosses y = h have escaped and leave the simulation.
class GateEscapeWorld final : public World {
public:
    GateEscapeWorld(const GateEscapeParams& p, std::vector<sim::RobotBody> robots, std::uint64_t seed)
        : p_(p), robots_(std::move(robots)), noise_(p.robot.sensor_noise, detail::noise_seed(seed))
    {
        const double h = p_.arena_size / 2.0;
        const double g = p_.gate_width / 2.0;
        open_.walls = {{{-h, -h}, {h, -h}}, {{h, -h}, {h, h}}, {{-h, h}, {-h, -h}}, {{h, h}, {g, h}}, {{-g, h}, {-h, h}}};
        open_.min = {-h, -h};
        open_.max = {h, h + 4.0 * p_.robot.radius};
        closed_ = open_;
        closed_.walls.push_back({{g, h}, {-g, h}});
        gate_centre_ = {0.0, h};
        diagonal_ = p_.arena_size * std::numbers::sqrt2;
    }

    void step(Controller& controller) override
    {
        if (done_)
            return;
        std::array<double, 6> in{};
        std::array<double, 2> out{};
        const sim::Arena& arena = closed() ? closed_ : open_;
        for (std::size_t i = 0; i < robots_.size(); ++i) {
            if (!robots_[i].active)
                continue;
            sense(i, arena, in);
            noise_.apply(in);
            controller.activate(in, out);
            detail::set_wheels(robots_[i], out);
        }
        for (auto& r : robots_)
            if (r.active)
                r = sim::step_kinematics(r, p_.robot.dt, p_.robot.max_speed);
        sim::resolve_collisions(robots_, arena);
        ++step_;

        const double h = p_.arena_size / 2.0;
        for (auto& r : robots_) {
            if (r.active && r.position.y > h) {
                r.active = false;
                r.linear_speed = r.angular_speed = 0.0;
                ++escaped_;
                if (!first_passage_)
                    first_passage_ = step_;
            }
        }

        double gate_distance = 0.0;
        sim::Vec2 com;
        std::size_t active = 0;
        for (const auto& r : robots_) {
            if (!r.active)
                continue;
            gate_distance += sim::distance(r.position, gate_centre_);
            com += r.position;
            ++active;
        }
        gate_distance_sum_ += gate_distance / static_cast<double>(robots_.size()) / diagonal_;
        if (active > 1) {
            com = com * (1.0 / static_cast<double>(active));
            double spread = 0.0;
            for (const auto& r : robots_)
                if (r.active)
                    spread += sim::distance(r.position, com);
            dispersion_sum_ += std::min(1.0, spread / static_cast<double>(active) / (diagonal_ / 2.0));
        }

        const bool shut_long_enough =
            first_passage_ && step_ >= *first_passage_ + p_.close_delay + p_.grace_steps;
        done_ = escaped_ == robots_.size() || shut_long_enough || step_ >= p_.max_steps;
    }

    bool done() const override { return done_; }
    std::size_t steps_elapsed() const override { return step_; }
    std::size_t max_steps() const override { return p_.max_steps; }

    void write_snapshot(TaskStateSnapshot& s) const override
    {
        auto& agents_group = s.groups[agents].entities;
        std::size_t n = 0;
        for (const auto& r : robots_)
            if (r.active)
                ++n;
        agents_group.resize(n);
        std::size_t k = 0;
        for (const auto& r : robots_) {
            if (!r.active)
                continue;
            auto& e = agents_group[k++];
            detail::fill_robot_entity(e, r, 5);
            e.theta[4] = passing(r) ? 1.0 : 0.0;
        }
        auto& gate_entity = s.groups[gate].entities;
        gate_entity.resize(1);
        gate_entity[0].theta.assign(1, first_passage_ ? 1.0 : 0.0);
        if (gate_entity[0].props.empty())
            gate_entity[0].props = shape_props(Shape::fixed_point, std::array{gate_centre_.x, gate_centre_.y});
        auto& wall_entity = s.groups[walls].entities;
        if (wall_entity.size() != 1) {
            wall_entity.resize(1);
            wall_entity[0].props = detail::segment_props(open_.walls);
        }
    }

    double fitness() const override { return gate_fitness(escaped_, step_, p_.max_steps, robots_.size()); }

    TaskSpecific task_specific() const override
    {
        const double steps = static_cast<double>(std::max<std::size_t>(step_, 1));
        const double opened = first_passage_ ? static_cast<double>(*first_passage_) : static_cast<double>(p_.max_steps);
        return {static_cast<double>(escaped_) / static_cast<double>(robots_.size()),
                opened / static_cast<double>(p_.max_steps),
                std::clamp(gate_distance_sum_ / steps, 0.0, 1.0),
                std::clamp(dispersion_sum_ / steps, 0.0, 1.0)};
    }

    std::span<const sim::RobotBody> bodies() const override { return robots_; }

private:
    bool closed() const { return first_passage_ && step_ >= *first_passage_ + p_.close_delay; }

    bool passing(const sim::RobotBody& r) const
    {
        const double h = p_.arena_size / 2.0;
        return std::abs(r.position.x) <= p_.gate_width / 2.0 && r.position.y >= h - r.radius;
    }

    void sense(std::size_t i, const sim::Arena& arena, std::array<double, 6>& in) const
    {
        const auto& self = robots_[i];
        detail::write_range_bearing(sim::sense_range_bearing(self, gate_centre_, p_.gate_sense_range), &in[0]);

        std::optional<sim::RangeBearing> nearest;
        for (std::size_t j = 0; j < robots_.size(); ++j) {
            if (j == i || !robots_[j].active)
                continue;
            auto rb = sim::sense_range_bearing(self, robots_[j].position, p_.robot_sense_range);
            if (rb && (!nearest || rb->range < nearest->range))
                nearest = rb;
        }
        detail::write_range_bearing(nearest, &in[2]);

        double wall = p_.wall_sense_range;
        for (const auto& w : arena.walls)
            wall = std::min(wall, sim::point_segment_distance(self.position, w) - self.radius);
        in[4] = std::clamp(wall / p_.wall_sense_range, 0.0, 1.0);
        in[5] = static_cast<double>(escaped_) / static_cast<double>(robots_.size());
    }

    GateEscapeParams p_;
    std::vector<sim::RobotBody> robots_;
    detail::SensorNoise noise_;
    sim::Arena open_;
    sim::Arena closed_;
    sim::Vec2 gate_centre_;
    double diagonal_ = 0.0;
    std::size_t step_ = 0;
    std::size_t escaped_ = 0;
    std::optional<std::size_t> first_passage_;
    bool done_ = false;
    double gate_distance_sum_ = 0.0;
    double dispersion_sum_ = 0.0;
};

} // namespace

GateEscapeTask::GateEscapeTask(GateEscapeParams params) : params_(params)
{
    if (params_.robots < 1 || params_.max_steps < 1 || params_.gate_width <= 2.0 * params_.robot.radius)
        throw std::invalid_argument("GateEscapeTask: invalid parameters");
    layout_.groups = {
        EntityGroup{"agent", {"x", "y", "turn speed", "linear speed", "passing gate"}, 0, params_.robots, {}},
        EntityGroup{"gate", {"is closing"}, 1, 1, {}},
        EntityGroup{"walls", {}, 1, 1, {}},
    };
    layout_.distance = geometric_distance;
    if (params_.layout == GroupLayout::canonical)
        layout_.excluded_pairs = {{gate, walls}};
}

std::unique_ptr<World> GateEscapeTask::create_world(std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    const double h = params_.arena_size / 2.0 - params_.robot.radius;
    return std::make_unique<GateEscapeWorld>(
        params_, detail::place_robots(params_.robots, params_.robot.radius, -h, h, rng), seed);
}

std::unique_ptr<World> GateEscapeTask::create_world(std::span<const sim::RobotBody> starts) const
{
    if (starts.size() != params_.robots)
        throw std::invalid_argument("GateEscapeTask: start pose count differs from robot count");
    std::vector<sim::RobotBody> robots(starts.begin(), starts.end());
    for (auto& r : robots)
        r.radius = params_.robot.radius;
    return std::make_unique<GateEscapeWorld>(params_, std::move(robots), 0);
}

} // namespace sdbc
