#pragma once

// The three collective-robotics benchmarks: gate escape, resource sharing and
// predator-prey pursuit. Each task owns its arena, sensors, fitness function,
// hand-designed (task-specific) characterisation and task-state adapter.

#include "sdbc/controller.hpp"
#include "sdbc/formalism.hpp"
#include "sdbc/sim.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sdbc {

/// Hand-designed four-component characterisation, every component in [0, 1].
using TaskSpecific = std::array<double, 4>;

/// `canonical` yields 10 / 10 / 13 features (gate walls merged, gate-walls pair
/// excluded, prey size kept); `naive` counts the groups directly (11 / 10 / 12).
enum class GroupLayout { canonical, naive };

std::string_view to_string(GroupLayout layout);
std::optional<GroupLayout> parse_group_layout(std::string_view s);

double gate_fitness(std::size_t escaped, std::size_t steps, std::size_t max_steps, std::size_t robots);
double sharing_fitness(std::size_t survivors, double mean_energy, double max_energy, std::size_t robots);
double pursuit_fitness(bool captured, std::size_t steps, std::size_t max_steps, double initial_distance,
                       double final_distance, double arena_diagonal);

/// Constant entity geometry, stored in EntityState::props[0] as a tag.
/// point: position is theta[0], theta[1]. fixed_point: props[1], props[2].
/// segments: props[1..] holds (x1, y1, x2, y2) quadruples. circle: centre
/// props[1], props[2], radius props[3] (distance to the circumference).
enum class Shape : int { point = 0, fixed_point = 1, segments = 2, circle = 3 };

std::vector<double> shape_props(Shape shape, std::span<const double> data = {});

/// Euclidean distance between entity geometries; point-to-segment for walls.
double geometric_distance(const EntityState& a, const EntityState& b);

/// Common robot and simulation parameters.
struct RobotParams {
    double radius = 0.05;
    double max_speed = 0.2; // m/s at wheel command 1
    double dt = 0.1;
    double sensor_noise = 0.0; // std of Gaussian noise added to every sensor input
};

struct GateEscapeParams {
    RobotParams robot;
    std::size_t robots = 4;
    double arena_size = 2.0;
    double gate_width = 0.3;
    std::size_t close_delay = 25;   // steps from first passage until the gate is shut
    std::size_t grace_steps = 10;   // steps simulated after the gate shuts
    std::size_t max_steps = 500;
    double gate_sense_range = 1.5;
    double robot_sense_range = 0.5;
    double wall_sense_range = 0.3;
    GroupLayout layout = GroupLayout::canonical;
};

struct ResourceSharingParams {
    RobotParams robot;
    std::size_t robots = 4;
    double arena_size = 2.0;
    double max_energy = 100.0;
    double initial_energy = 100.0;
    double base_consumption = 0.2;
    double speed_consumption = 0.8;
    double recharge = 2.0;
    double station_radius = 0.2;
    std::size_t max_steps = 1000;
    double robot_sense_range = 0.5;
    GroupLayout layout = GroupLayout::canonical;
};

struct PredatorPreyParams {
    RobotParams robot;
    std::size_t predators = 3;
    double arena_size = 8.0;
    double zone_radius = 3.0;
    std::size_t max_steps = 600;
    double prey_speed = 0.2;
    double prey_sense_range = 0.5;
    double prey_sensor_range = 2.0;     // predators sensing the prey
    double predator_sensor_range = 2.0; // predators sensing each other
    double prey_start_min = 0.8;        // prey start distance from the zone centre
    double prey_start_max = 2.0;
    GroupLayout layout = GroupLayout::canonical;
};

/// One live simulation of a task.
class World {
public:
    virtual ~World() = default;

    /// Advances one step with the team's shared controller. No-op once done().
    virtual void step(Controller& controller) = 0;
    virtual bool done() const = 0;
    virtual std::size_t steps_elapsed() const = 0;
    virtual std::size_t max_steps() const = 0;

    /// Fills the entity lists of `s`, which must be a copy of Task::layout().
    virtual void write_snapshot(TaskStateSnapshot& s) const = 0;
    virtual double fitness() const = 0;
    virtual TaskSpecific task_specific() const = 0;
    virtual std::span<const sim::RobotBody> bodies() const = 0;
};

class Task {
public:
    virtual ~Task() = default;

    virtual std::string_view name() const = 0;
    virtual std::size_t sensor_count() const = 0;
    std::size_t effector_count() const noexcept { return 2; }
    virtual std::size_t max_steps() const = 0;

    /// Group declarations (entity lists empty), distance function and excluded pairs.
    const TaskStateSnapshot& layout() const noexcept { return layout_; }

    /// A world whose randomised initial conditions are drawn from `seed`.
    virtual std::unique_ptr<World> create_world(std::uint64_t seed) const = 0;

    /// Task-state adapter: a fresh snapshot of `world`.
    TaskStateSnapshot snapshot(const World& world) const;

protected:
    TaskStateSnapshot layout_;
};

class GateEscapeTask final : public Task {
public:
    explicit GateEscapeTask(GateEscapeParams params = {});
    std::string_view name() const override { return "gate_escape"; }
    std::size_t sensor_count() const override { return 6; }
    std::size_t max_steps() const override { return params_.max_steps; }
    std::unique_ptr<World> create_world(std::uint64_t seed) const override;
    const GateEscapeParams& params() const noexcept { return params_; }

    /// World with explicit start poses instead of random placement.
    std::unique_ptr<World> create_world(std::span<const sim::RobotBody> starts) const;

private:
    GateEscapeParams params_;
};

class ResourceSharingTask final : public Task {
public:
    explicit ResourceSharingTask(ResourceSharingParams params = {});
    std::string_view name() const override { return "resource_sharing"; }
    std::size_t sensor_count() const override { return 6; }
    std::size_t max_steps() const override { return params_.max_steps; }
    std::unique_ptr<World> create_world(std::uint64_t seed) const override;
    const ResourceSharingParams& params() const noexcept { return params_; }

    std::unique_ptr<World> create_world(std::span<const sim::RobotBody> starts) const;

private:
    ResourceSharingParams params_;
};

class PredatorPreyTask final : public Task {
public:
    explicit PredatorPreyTask(PredatorPreyParams params = {});
    std::string_view name() const override { return "predator_prey"; }
    std::size_t sensor_count() const override { return 6; }
    std::size_t max_steps() const override { return params_.max_steps; }
    std::unique_ptr<World> create_world(std::uint64_t seed) const override;
    const PredatorPreyParams& params() const noexcept { return params_; }

    /// World with explicit start poses; `predators` must hold params().predators bodies.
    std::unique_ptr<World> create_world(std::span<const sim::RobotBody> predators, sim::RobotBody prey) const;

private:
    PredatorPreyParams params_;
};

/// Prey behaviour: flee at full speed directly away from the mean position of
/// the predators within `sense_range`; stand still when none is sensed.
struct PreyCommand {
    bool move = false;
    double heading = 0.0;
    double speed = 0.0; // fraction of prey speed
};
PreyCommand prey_policy(const sim::RobotBody& prey, std::span<const sim::RobotBody> predators, double sense_range);

} // namespace sdbc
