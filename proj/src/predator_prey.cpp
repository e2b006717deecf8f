#include "sdbc/tasks.hpp"

#include "world_util.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace sdbc {

namespace {

enum Group : std::size_t { predators = 0, prey = 1, bounds = 2 };

constexpr double capture_tolerance = 1e-3;

// Walled square arena containing a circular chase zone centred at the origin.
// Body index predators_ .. : the last body is the prey.
class PredatorPreyWorld final : public World {
public:
    PredatorPreyWorld(const PredatorPreyParams& p, std::vector<sim::RobotBody> bodies, std::uint64_t seed)
        : p_(p), bodies_(std::move(bodies)), noise_(p.robot.sensor_noise, detail::noise_seed(seed))
    {
        const double h = p_.arena_size / 2.0;
        arena_.walls = detail::square_walls(h);
        arena_.min = {-h, -h};
        arena_.max = {h, h};
        diagonal_ = p_.arena_size * std::numbers::sqrt2;
        initial_distance_ = mean_prey_distance();
    }

    void step(Controller& controller) override
    {
        if (done_)
            return;
        const std::size_t n = p_.predators;
        std::array<double, 6> in{};
        std::array<double, 2> out{};
        for (std::size_t i = 0; i < n; ++i) {
            sense(i, in);
            noise_.apply(in);
            controller.activate(in, out);
            detail::set_wheels(bodies_[i], out);
        }
        const PreyCommand cmd = prey_policy(prey_body(), std::span(bodies_).first(n), p_.prey_sense_range);

        for (std::size_t i = 0; i < n; ++i)
            bodies_[i] = sim::step_kinematics(bodies_[i], p_.robot.dt, p_.robot.max_speed);
        auto& q = bodies_[n];
        const double old_heading = q.heading;
        if (cmd.move) {
            q.heading = cmd.heading;
            q.linear_speed = p_.prey_speed * cmd.speed;
            q.position += sim::Vec2{std::cos(q.heading), std::sin(q.heading)} * (q.linear_speed * p_.robot.dt);
        }
        else {
            q.linear_speed = 0.0;
        }
        q.angular_speed = sim::normalize_angle(q.heading - old_heading) / p_.robot.dt;
        sim::resolve_collisions(bodies_, arena_);
        ++step_;

        for (std::size_t i = 0; i < n; ++i)
            if (sim::distance(bodies_[i].position, q.position) <= bodies_[i].radius + q.radius + capture_tolerance)
                captured_ = true;
        final_distance_ = mean_prey_distance();

        sim::Vec2 com;
        for (std::size_t i = 0; i < n; ++i)
            com += bodies_[i].position;
        com = com * (1.0 / static_cast<double>(n));
        double spread = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            spread += sim::distance(bodies_[i].position, com);
        dispersion_sum_ += std::min(1.0, spread / static_cast<double>(n) / (diagonal_ / 2.0));

        if (captured_) {
            q.active = false;
            q.linear_speed = q.angular_speed = 0.0;
        }
        const bool escaped = sim::norm(q.position) > p_.zone_radius;
        done_ = captured_ || escaped || step_ >= p_.max_steps;
    }

    bool done() const override { return done_; }
    std::size_t steps_elapsed() const override { return step_; }
    std::size_t max_steps() const override { return p_.max_steps; }

    void write_snapshot(TaskStateSnapshot& s) const override
    {
        auto& pred = s.groups[predators].entities;
        pred.resize(p_.predators);
        for (std::size_t i = 0; i < p_.predators; ++i)
            detail::fill_robot_entity(pred[i], bodies_[i], 4);
        auto& py = s.groups[prey].entities;
        const bool present = !captured_ || p_.layout == GroupLayout::naive;
        py.resize(present ? 1 : 0);
        if (present)
            detail::fill_robot_entity(py[0], prey_body(), 4);
        auto& zone = s.groups[bounds].entities;
        if (zone.size() != 1) {
            zone.resize(1);
            zone[0].props = shape_props(Shape::circle, std::array{0.0, 0.0, p_.zone_radius});
        }
    }

    double fitness() const override
    {
        return pursuit_fitness(captured_, step_, p_.max_steps, initial_distance_, final_distance_, diagonal_);
    }

    TaskSpecific task_specific() const override
    {
        const double steps = static_cast<double>(std::max<std::size_t>(step_, 1));
        return {captured_ ? 1.0 : 0.0, static_cast<double>(step_) / static_cast<double>(p_.max_steps),
                std::clamp(final_distance_ / diagonal_, 0.0, 1.0), std::clamp(dispersion_sum_ / steps, 0.0, 1.0)};
    }

    std::span<const sim::RobotBody> bodies() const override { return bodies_; }

    double initial_distance() const { return initial_distance_; }

private:
    const sim::RobotBody& prey_body() const { return bodies_[p_.predators]; }

    double mean_prey_distance() const
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < p_.predators; ++i)
            sum += sim::distance(bodies_[i].position, prey_body().position);
        return sum / static_cast<double>(p_.predators);
    }

    void sense(std::size_t i, std::array<double, 6>& in) const
    {
        const auto& self = bodies_[i];
        detail::write_range_bearing(sim::sense_range_bearing(self, prey_body().position, p_.prey_sensor_range), &in[0]);
        std::array<std::optional<sim::RangeBearing>, 2> nearest{};
        for (std::size_t j = 0; j < p_.predators; ++j) {
            if (j == i)
                continue;
            auto rb = sim::sense_range_bearing(self, bodies_[j].position, p_.predator_sensor_range);
            if (!rb)
                continue;
            if (!nearest[0] || rb->range < nearest[0]->range) {
                nearest[1] = nearest[0];
                nearest[0] = rb;
            }
            else if (!nearest[1] || rb->range < nearest[1]->range) {
                nearest[1] = rb;
            }
        }
        detail::write_range_bearing(nearest[0], &in[2]);
        detail::write_range_bearing(nearest[1], &in[4]);
    }

    PredatorPreyParams p_;
    std::vector<sim::RobotBody> bodies_;
    detail::SensorNoise noise_;
    sim::Arena arena_;
    double diagonal_ = 0.0;
    double initial_distance_ = 0.0;
    double final_distance_ = 0.0;
    double dispersion_sum_ = 0.0;
    std::size_t step_ = 0;
    bool captured_ = false;
    bool done_ = false;
};

} // namespace

PredatorPreyTask::PredatorPreyTask(PredatorPreyParams params) : params_(params)
{
    if (params_.predators < 1 || params_.max_steps < 1 || params_.zone_radius <= 0.0 ||
        params_.zone_radius * 2.0 > params_.arena_size || params_.prey_start_min > params_.prey_start_max ||
        params_.prey_start_max >= params_.zone_radius)
        throw std::invalid_argument("PredatorPreyTask: invalid parameters");
    layout_.groups = {
        EntityGroup{"predators", {"x", "y", "turn speed", "linear speed"}, params_.predators, params_.predators, {}},
        EntityGroup{"prey", {"x", "y", "turn speed", "linear speed"}, params_.layout == GroupLayout::canonical ? 0u : 1u, 1, {}},
        EntityGroup{"bounds", {}, 1, 1, {}},
    };
    layout_.distance = geometric_distance;
}

namespace {

std::vector<sim::RobotBody> fixed_predator_starts(const PredatorPreyParams& p)
{
    // A row facing +y, below the zone centre.
    std::vector<sim::RobotBody> out(p.predators);
    const double spacing = 4.0 * p.robot.radius;
    const double x0 = -spacing * static_cast<double>(p.predators - 1) / 2.0;
    for (std::size_t i = 0; i < p.predators; ++i) {
        out[i].position = {x0 + spacing * static_cast<double>(i), -p.zone_radius / 2.0};
        out[i].heading = std::numbers::pi / 2.0;
        out[i].radius = p.robot.radius;
    }
    return out;
}

} // namespace

std::unique_ptr<World> PredatorPreyTask::create_world(std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    auto bodies = fixed_predator_starts(params_);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> radius(params_.prey_start_min, params_.prey_start_max);
    sim::RobotBody q;
    q.radius = params_.robot.radius;
    for (;;) {
        const double a = angle(rng);
        const double r = radius(rng);
        q.position = {r * std::cos(a), r * std::sin(a)};
        const bool clear = std::all_of(bodies.begin(), bodies.end(), [&](const sim::RobotBody& b) {
            return sim::distance(b.position, q.position) > params_.prey_sense_range;
        });
        if (clear)
            break;
    }
    q.heading = angle(rng);
    bodies.push_back(q);
    return std::make_unique<PredatorPreyWorld>(params_, std::move(bodies), seed);
}

std::unique_ptr<World> PredatorPreyTask::create_world(std::span<const sim::RobotBody> predators_start,
                                                      sim::RobotBody prey_start) const
{
    if (predators_start.size() != params_.predators)
        throw std::invalid_argument("PredatorPreyTask: start pose count differs from predator count");
    std::vector<sim::RobotBody> bodies(predators_start.begin(), predators_start.end());
    bodies.push_back(prey_start);
    for (auto& b : bodies)
        b.radius = params_.robot.radius;
    return std::make_unique<PredatorPreyWorld>(params_, std::move(bodies), 0);
}

} // namespace sdbc
