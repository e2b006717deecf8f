#include "sdbc/tasks.hpp"

#include "world_util.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace sdbc {

namespace {

enum Group : std::size_t { agents = 0, station = 1 };

// Square arena with the charging station at the origin. Only one robot (the
// occupant) charges at a time; it keeps the station while it stays inside.
class ResourceSharingWorld final : public World {
public:
    ResourceSharingWorld(const ResourceSharingParams& p, std::vector<sim::RobotBody> robots, std::uint64_t seed)
        : p_(p), robots_(std::move(robots)), energy_(robots_.size(), p.initial_energy),
          noise_(p.robot.sensor_noise, detail::noise_seed(seed))
    {
        const double h = p_.arena_size / 2.0;
        arena_.walls = detail::square_walls(h);
        arena_.min = {-h, -h};
        arena_.max = {h, h};
        diagonal_ = p_.arena_size * std::numbers::sqrt2;
    }

    void step(Controller& controller) override
    {
        if (done_)
            return;
        std::array<double, 6> in{};
        std::array<double, 2> out{};
        for (std::size_t i = 0; i < robots_.size(); ++i) {
            if (!robots_[i].active)
                continue;
            sense(i, in);
            noise_.apply(in);
            controller.activate(in, out);
            detail::set_wheels(robots_[i], out);
        }
        for (auto& r : robots_)
            if (r.active)
                r = sim::step_kinematics(r, p_.robot.dt, p_.robot.max_speed);
        sim::resolve_collisions(robots_, arena_);
        ++step_;

        if (occupant_ && !(robots_[*occupant_].active && on_station(robots_[*occupant_])))
            occupant_.reset();
        if (!occupant_) {
            double best = p_.station_radius;
            for (std::size_t i = 0; i < robots_.size(); ++i) {
                if (!robots_[i].active)
                    continue;
                const double d = sim::norm(robots_[i].position);
                if (d <= best && (!occupant_ || d < best)) {
                    occupant_ = i;
                    best = d;
                }
            }
        }

        double energy_total = 0.0;
        for (std::size_t i = 0; i < robots_.size(); ++i) {
            auto& r = robots_[i];
            if (!r.active)
                continue;
            const double wheel = std::abs((std::clamp(r.left, -1.0, 1.0) + std::clamp(r.right, -1.0, 1.0)) / 2.0);
            energy_[i] -= p_.base_consumption + p_.speed_consumption * wheel;
            if (occupant_ == i)
                energy_[i] += p_.recharge;
            energy_[i] = std::min(energy_[i], p_.max_energy);
            speed_sum_ += std::abs(r.linear_speed) / p_.robot.max_speed;
            station_distance_sum_ += sim::norm(r.position) / (diagonal_ / 2.0);
            ++alive_steps_;
            if (energy_[i] <= 0.0) {
                energy_[i] = 0.0;
                r.active = false;
                r.linear_speed = r.angular_speed = 0.0;
                if (occupant_ == i)
                    occupant_.reset();
            }
            energy_total += energy_[i];
        }
        energy_sum_ += energy_total;

        const bool any_alive = std::any_of(robots_.begin(), robots_.end(), [](const auto& r) { return r.active; });
        done_ = !any_alive || step_ >= p_.max_steps;
    }

    bool done() const override { return done_; }
    std::size_t steps_elapsed() const override { return step_; }
    std::size_t max_steps() const override { return p_.max_steps; }

    void write_snapshot(TaskStateSnapshot& s) const override
    {
        auto& group = s.groups[agents].entities;
        group.resize(alive());
        std::size_t k = 0;
        for (std::size_t i = 0; i < robots_.size(); ++i) {
            if (!robots_[i].active)
                continue;
            auto& e = group[k++];
            detail::fill_robot_entity(e, robots_[i], 6);
            e.theta[4] = energy_[i];
            e.theta[5] = occupant_ == i ? 1.0 : 0.0;
        }
        auto& st = s.groups[station].entities;
        st.resize(1);
        st[0].theta.assign(1, occupant_ ? 1.0 : 0.0);
        if (st[0].props.empty())
            st[0].props = shape_props(Shape::fixed_point, std::array{0.0, 0.0});
    }

    double mean_energy() const
    {
        return energy_sum_ / (static_cast<double>(robots_.size()) * static_cast<double>(p_.max_steps));
    }

    double fitness() const override
    {
        return sharing_fitness(alive(), std::min(mean_energy(), p_.max_energy), p_.max_energy, robots_.size());
    }

    TaskSpecific task_specific() const override
    {
        const double robot_steps = static_cast<double>(std::max<std::size_t>(alive_steps_, 1));
        return {static_cast<double>(alive()) / static_cast<double>(robots_.size()),
                std::clamp(mean_energy() / p_.max_energy, 0.0, 1.0),
                std::clamp(speed_sum_ / robot_steps, 0.0, 1.0),
                std::clamp(station_distance_sum_ / robot_steps, 0.0, 1.0)};
    }

    std::span<const sim::RobotBody> bodies() const override { return robots_; }

private:
    std::size_t alive() const
    {
        return static_cast<std::size_t>(std::count_if(robots_.begin(), robots_.end(), [](const auto& r) { return r.active; }));
    }

    bool on_station(const sim::RobotBody& r) const { return sim::norm(r.position) <= p_.station_radius; }

    void sense(std::size_t i, std::array<double, 6>& in) const
    {
        const auto& self = robots_[i];
        in[0] = energy_[i] / p_.max_energy;
        detail::write_range_bearing(sim::sense_range_bearing(self, {0.0, 0.0}, diagonal_), &in[1]);
        in[3] = occupant_ && *occupant_ != i ? 1.0 : 0.0;
        std::optional<sim::RangeBearing> nearest;
        for (std::size_t j = 0; j < robots_.size(); ++j) {
            if (j == i || !robots_[j].active)
                continue;
            auto rb = sim::sense_range_bearing(self, robots_[j].position, p_.robot_sense_range);
            if (rb && (!nearest || rb->range < nearest->range))
                nearest = rb;
        }
        detail::write_range_bearing(nearest, &in[4]);
    }

    ResourceSharingParams p_;
    std::vector<sim::RobotBody> robots_;
    std::vector<double> energy_;
    detail::SensorNoise noise_;
    sim::Arena arena_;
    double diagonal_ = 0.0;
    std::optional<std::size_t> occupant_;
    std::size_t step_ = 0;
    bool done_ = false;
    double energy_sum_ = 0.0;
    double speed_sum_ = 0.0;
    double station_distance_sum_ = 0.0;
    std::size_t alive_steps_ = 0;
};

} // namespace

ResourceSharingTask::ResourceSharingTask(ResourceSharingParams params) : params_(params)
{
    if (params_.robots < 1 || params_.max_steps < 1 || params_.max_energy <= 0.0 ||
        params_.initial_energy <= 0.0 || params_.initial_energy > params_.max_energy)
        throw std::invalid_argument("ResourceSharingTask: invalid parameters");
    layout_.groups = {
        EntityGroup{"agent", {"x", "y", "turn speed", "linear speed", "energy level", "charging"}, 0, params_.robots, {}},
        EntityGroup{"station", {"occupied"}, 1, 1, {}},
    };
    layout_.distance = geometric_distance;
}

std::unique_ptr<World> ResourceSharingTask::create_world(std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    const double h = params_.arena_size / 2.0 - params_.robot.radius;
    return std::make_unique<ResourceSharingWorld>(
        params_, detail::place_robots(params_.robots, params_.robot.radius, -h, h, rng), seed);
}

std::unique_ptr<World> ResourceSharingTask::create_world(std::span<const sim::RobotBody> starts) const
{
    if (starts.size() != params_.robots)
        throw std::invalid_argument("ResourceSharingTask: start pose count differs from robot count");
    std::vector<sim::RobotBody> robots(starts.begin(), starts.end());
    for (auto& r : robots)
        r.radius = params_.robot.radius;
    return std::make_unique<ResourceSharingWorld>(params_, std::move(robots), 0);
}

} // namespace sdbc
