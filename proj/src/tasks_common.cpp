#include "sdbc/tasks.hpp"

#include "sdbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdbc {

std::string_view to_string(GroupLayout layout)
{
    return layout == GroupLayout::canonical ? "canonical" : "naive";
}

std::optional<GroupLayout> parse_group_layout(std::string_view s)
{
    if (s == "canonical")
        return GroupLayout::canonical;
    if (s == "naive")
        return GroupLayout::naive;
    return std::nullopt;
}

double gate_fitness(std::size_t escaped, std::size_t steps, std::size_t max_steps, std::size_t robots)
{
    if (escaped > robots || steps > max_steps || max_steps == 0)
        throw std::invalid_argument("gate_fitness: arguments out of range");
    return (static_cast<double>(escaped) + static_cast<double>(steps) / static_cast<double>(max_steps)) /
           (1.0 + static_cast<double>(robots));
}

double sharing_fitness(std::size_t survivors, double mean_energy, double max_energy, std::size_t robots)
{
    if (survivors > robots || mean_energy < 0.0 || mean_energy > max_energy || max_energy <= 0.0)
        throw std::invalid_argument("sharing_fitness: arguments out of range");
    return (static_cast<double>(survivors) + mean_energy / max_energy) / (1.0 + static_cast<double>(robots));
}

double pursuit_fitness(bool captured, std::size_t steps, std::size_t max_steps, double initial_distance,
                       double final_distance, double arena_diagonal)
{
    if (initial_distance < 0.0 || final_distance < 0.0 || arena_diagonal <= 0.0 || max_steps == 0)
        throw std::invalid_argument("pursuit_fitness: arguments out of range");
    if (captured)
        return 2.0 - static_cast<double>(steps) / static_cast<double>(max_steps);
    return std::max(initial_distance - final_distance, 0.0) / arena_diagonal;
}

std::vector<double> shape_props(Shape shape, std::span<const double> data)
{
    std::vector<double> props;
    props.reserve(1 + data.size());
    props.push_back(static_cast<double>(shape));
    props.insert(props.end(), data.begin(), data.end());
    return props;
}

namespace {

Shape shape_of(const EntityState& e)
{
    return e.props.empty() ? Shape::point : static_cast<Shape>(static_cast<int>(e.props[0]));
}

sim::Vec2 location(const EntityState& e, Shape s)
{
    if (s == Shape::point)
        return {e.theta.at(0), e.theta.at(1)};
    return {e.props.at(1), e.props.at(2)};
}

template <typename Fn>
void for_each_segment(const EntityState& e, Fn&& fn)
{
    for (std::size_t i = 1; i + 3 < e.props.size(); i += 4)
        fn(sim::Segment{{e.props[i], e.props[i + 1]}, {e.props[i + 2], e.props[i + 3]}});
}

double point_to_segments(sim::Vec2 p, const EntityState& walls)
{
    double best = std::numeric_limits<double>::infinity();
    for_each_segment(walls, [&](const sim::Segment& s) { best = std::min(best, sim::point_segment_distance(p, s)); });
    return best;
}

double point_to_circle(sim::Vec2 p, const EntityState& circle)
{
    const sim::Vec2 c{circle.props.at(1), circle.props.at(2)};
    return std::abs(circle.props.at(3) - sim::distance(p, c));
}

double segment_to_circle(const sim::Segment& s, const EntityState& circle)
{
    const sim::Vec2 c{circle.props.at(1), circle.props.at(2)};
    const double r = circle.props.at(3);
    // |q - c| is convex along the segment, so it spans [near, far] continuously.
    const double near = sim::point_segment_distance(c, s);
    const double far = std::max(sim::distance(s.a, c), sim::distance(s.b, c));
    if (r >= near && r <= far)
        return 0.0;
    return std::min(std::abs(r - near), std::abs(r - far));
}

double segment_to_segment(const sim::Segment& s, const sim::Segment& t)
{
    return std::min({sim::point_segment_distance(s.a, t), sim::point_segment_distance(s.b, t),
                     sim::point_segment_distance(t.a, s), sim::point_segment_distance(t.b, s)});
}

} // namespace

double geometric_distance(const EntityState& a, const EntityState& b)
{
    const EntityState* x = &a;
    const EntityState* y = &b;
    if (shape_of(*x) > shape_of(*y))
        std::swap(x, y);
    const Shape sx = shape_of(*x);
    const Shape sy = shape_of(*y);
    const bool x_point = sx == Shape::point || sx == Shape::fixed_point;
    const bool y_point = sy == Shape::point || sy == Shape::fixed_point;

    if (x_point && y_point)
        return sim::distance(location(*x, sx), location(*y, sy));
    if (x_point && sy == Shape::segments)
        return point_to_segments(location(*x, sx), *y);
    if (x_point && sy == Shape::circle)
        return point_to_circle(location(*x, sx), *y);
    if (sx == Shape::segments && sy == Shape::segments) {
        double best = std::numeric_limits<double>::infinity();
        for_each_segment(*x, [&](const sim::Segment& s) {
            for_each_segment(*y, [&](const sim::Segment& t) { best = std::min(best, segment_to_segment(s, t)); });
        });
        return best;
    }
    if (sx == Shape::segments && sy == Shape::circle) {
        double best = std::numeric_limits<double>::infinity();
        for_each_segment(*x, [&](const sim::Segment& s) { best = std::min(best, segment_to_circle(s, *y)); });
        return best;
    }
    // circle - circle
    const double d = sim::distance(location(*x, Shape::fixed_point), location(*y, Shape::fixed_point));
    const double r1 = x->props.at(3);
    const double r2 = y->props.at(3);
    if (d >= r1 + r2)
        return d - r1 - r2;
    if (d <= std::abs(r1 - r2))
        return std::abs(r1 - r2) - d;
    return 0.0;
}

TaskStateSnapshot Task::snapshot(const World& world) const
{
    TaskStateSnapshot s = layout_;
    world.write_snapshot(s);
    return s;
}

PreyCommand prey_policy(const sim::RobotBody& prey, std::span<const sim::RobotBody> predators, double sense_range)
{
    sim::Vec2 sum;
    std::size_t sensed = 0;
    for (const auto& p : predators) {
        if (sim::distance(p.position, prey.position) <= sense_range) {
            sum += p.position;
            ++sensed;
        }
    }
    if (sensed == 0)
        return {};
    const sim::Vec2 centre = sum * (1.0 / static_cast<double>(sensed));
    sim::Vec2 away = prey.position - centre;
    if (sim::norm(away) < 1e-12)
        away = {std::cos(prey.heading), std::sin(prey.heading)};
    return PreyCommand{true, sim::normalize_angle(std::atan2(away.y, away.x)), 1.0};
}

} // namespace sdbc
