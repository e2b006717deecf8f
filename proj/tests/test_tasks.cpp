#include "sdbc/evolution.hpp"
#include "sdbc/tasks.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace sdbc;

namespace {

constexpr double pi = std::numbers::pi;

// Genome whose outputs ignore the inputs: wheel commands 2 * logistic(bias) - 1.
Genome constant_genome(const ControllerSpec& spec, double left_bias, double right_bias)
{
    Genome g{std::vector<double>(spec.genome_length(), 0.0)};
    const std::size_t out0 = (spec.inputs + 1) * spec.hidden;
    g.weights[out0 + spec.hidden] = left_bias;
    g.weights[out0 + (spec.hidden + 1) + spec.hidden] = right_bias;
    return g;
}

ControllerSpec spec_for(const Task& t) { return {t.sensor_count(), 8, t.effector_count()}; }

sim::RobotBody pose(double x, double y, double heading)
{
    sim::RobotBody b;
    b.position = {x, y};
    b.heading = heading;
    return b;
}

std::size_t run_to_end(World& w, Controller& c)
{
    while (!w.done())
        w.step(c);
    return w.steps_elapsed();
}

std::size_t feature_count(const Task& t)
{
    auto w = t.create_world(3);
    return extract_features(t.snapshot(*w)).values.size();
}

} // namespace

TEST_CASE("gate fitness")
{
    CHECK(gate_fitness(0, 0, 500, 4) == 0.0);
    CHECK(gate_fitness(4, 500, 500, 4) == 1.0);
    CHECK(gate_fitness(2, 250, 500, 4) == doctest::Approx(0.5));
    CHECK_THROWS(gate_fitness(5, 0, 500, 4));
    CHECK_THROWS(gate_fitness(0, 501, 500, 4));
}

TEST_CASE("sharing fitness")
{
    CHECK(sharing_fitness(0, 0.0, 100.0, 4) == 0.0);
    CHECK(sharing_fitness(4, 100.0, 100.0, 4) == 1.0);
    CHECK(sharing_fitness(3, 50.0, 100.0, 4) == doctest::Approx(0.7));
    CHECK_THROWS(sharing_fitness(1, 101.0, 100.0, 4));
}

TEST_CASE("pursuit fitness")
{
    CHECK(pursuit_fitness(true, 300, 600, 2.0, 0.0, 8.0) == doctest::Approx(1.5));
    CHECK(pursuit_fitness(false, 600, 600, 1.0, 1.5, 8.0) == 0.0);
    CHECK(pursuit_fitness(false, 600, 600, 3.0, 1.0, 8.0) == doctest::Approx(0.25));
    CHECK_THROWS(pursuit_fitness(false, 1, 600, -1.0, 0.0, 8.0));
}

TEST_CASE("feature counts of the task-state adapters")
{
    CHECK(feature_count(GateEscapeTask{}) == 10);
    CHECK(feature_count(ResourceSharingTask{}) == 10);
    CHECK(feature_count(PredatorPreyTask{}) == 13);

    GateEscapeParams g;
    g.layout = GroupLayout::naive;
    ResourceSharingParams r;
    r.layout = GroupLayout::naive;
    PredatorPreyParams p;
    p.layout = GroupLayout::naive;
    CHECK(feature_count(GateEscapeTask{g}) == 11);
    CHECK(feature_count(ResourceSharingTask{r}) == 10);
    CHECK(feature_count(PredatorPreyTask{p}) == 12);

    CHECK(parse_group_layout("canonical") == GroupLayout::canonical);
    CHECK(parse_group_layout("naive") == GroupLayout::naive);
    CHECK_FALSE(parse_group_layout("other"));
}

TEST_CASE("characterisation lengths are 2F + 1")
{
    const GateEscapeTask gate;
    const ResourceSharingTask sharing;
    const PredatorPreyTask pursuit;
    const std::vector<const Task*> tasks{&gate, &sharing, &pursuit};
    const std::vector<std::size_t> expected{21, 21, 27};
    std::mt19937_64 rng(1);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto spec = spec_for(*tasks[i]);
        const auto g = random_genome(spec, rng);
        const std::vector<std::uint64_t> seeds{1, 2};
        const auto e = evaluate(g, spec, *tasks[i], seeds);
        CHECK(e.sdbc.values.size() == expected[i]);
        REQUIRE(e.sdbc.schema);
        CHECK(e.sdbc.schema->names.back() == "simulation length");
    }
}

TEST_CASE("feature names of the resource sharing task")
{
    const ResourceSharingTask t;
    auto w = t.create_world(1);
    const auto f = extract_features(t.snapshot(*w));
    const std::vector<std::string> names{"agent group size",   "agent x",          "agent y",
                                         "agent turn speed",   "agent linear speed", "agent energy level",
                                         "agent charging",     "station occupied", "agent dispersion",
                                         "agent-station distance"};
    CHECK(f.schema->names == names);
}

TEST_CASE("random controllers keep fitness and task-specific values in range")
{
    const GateEscapeTask gate;
    const ResourceSharingTask sharing;
    const PredatorPreyTask pursuit;
    const std::vector<std::pair<const Task*, double>> tasks{{&gate, 1.0}, {&sharing, 1.0}, {&pursuit, 2.0}};
    std::mt19937_64 rng(2024);
    for (const auto& [task, max_fit] : tasks) {
        const auto spec = spec_for(*task);
        for (int i = 0; i < 1000; ++i) {
            const auto g = random_genome(spec, rng, 2.0);
            Controller c(g, spec);
            const auto rec = run_trial(*task, c, rng());
            CHECK(rec.fitness >= 0.0);
            CHECK(rec.fitness <= max_fit);
            CHECK(rec.steps >= 1);
            CHECK(rec.steps <= task->max_steps());
            for (double v : rec.task_specific) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            for (double v : rec.sdbc.values)
                CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("worlds are deterministic in their seed")
{
    const GateEscapeTask gate;
    const ResourceSharingTask sharing;
    const PredatorPreyTask pursuit;
    std::mt19937_64 rng(6);
    for (const Task* t : std::vector<const Task*>{&gate, &sharing, &pursuit}) {
        const auto spec = spec_for(*t);
        const auto g = random_genome(spec, rng);
        Controller c1(g, spec), c2(g, spec);
        const auto a = run_trial(*t, c1, 77);
        const auto b = run_trial(*t, c2, 77);
        CHECK(a.fitness == b.fitness);
        CHECK(a.steps == b.steps);
        CHECK(a.sdbc.values == b.sdbc.values);
        CHECK(a.task_specific == b.task_specific);
    }
}

TEST_CASE("gate escape with an idle team")
{
    const GateEscapeTask t;
    const auto spec = spec_for(t);
    Controller idle(constant_genome(spec, 0.0, 0.0), spec);
    auto w = t.create_world(11);
    const auto start = t.snapshot(*w);
    CHECK(run_to_end(*w, idle) == t.max_steps());
    const auto ts = w->task_specific();
    CHECK(ts[0] == 0.0);
    CHECK(ts[1] == 1.0); // no passage: the open time is the full trial
    CHECK(ts[2] > 0.0);
    CHECK(ts[3] > 0.0);

    // Constant positions: the distance and dispersion means equal their initial values.
    const double h = t.params().arena_size / 2.0;
    const double diag = t.params().arena_size * std::numbers::sqrt2;
    double gate_d = 0.0, cx = 0.0, cy = 0.0;
    for (const auto& b : w->bodies()) {
        gate_d += std::hypot(b.position.x, b.position.y - h);
        cx += b.position.x;
        cy += b.position.y;
    }
    const double n = double(w->bodies().size());
    cx /= n;
    cy /= n;
    double spread = 0.0;
    for (const auto& b : w->bodies())
        spread += std::hypot(b.position.x - cx, b.position.y - cy);
    CHECK(ts[2] == doctest::Approx(gate_d / n / diag).epsilon(1e-9));
    CHECK(ts[3] == doctest::Approx(spread / n / (diag / 2.0)).epsilon(1e-9));
    CHECK(w->fitness() == doctest::Approx(gate_fitness(0, t.max_steps(), t.max_steps(), 4)));

    // The gate never starts closing.
    CHECK(t.snapshot(*w).groups[1].entities[0].theta[0] == 0.0);
    CHECK(start.groups[0].entities.size() == 4);
}

TEST_CASE("a column driving through the gate escapes completely")
{
    const GateEscapeTask t;
    const auto spec = spec_for(t);
    Controller forward(constant_genome(spec, 20.0, 20.0), spec);
    std::vector<sim::RobotBody> starts{pose(0.0, 0.9, pi / 2.0), pose(0.0, 0.76, pi / 2.0),
                                       pose(0.0, 0.62, pi / 2.0), pose(0.0, 0.48, pi / 2.0)};
    auto w = t.create_world(starts);
    std::size_t first = 0;
    while (!w->done()) {
        const bool closing_before = t.snapshot(*w).groups[1].entities[0].theta[0] == 1.0;
        w->step(forward);
        const auto s = t.snapshot(*w);
        const bool closing = s.groups[1].entities[0].theta[0] == 1.0;
        if (closing && !closing_before) {
            first = w->steps_elapsed();
            CHECK(s.groups[0].entities.size() == 3); // closing starts with the first passage
        }
    }
    CHECK(first == 6); // y = 0.9 + 5 * 0.02 sits on the line; step 6 crosses it
    const auto ts = w->task_specific();
    CHECK(ts[0] == 1.0);
    CHECK(ts[1] == doctest::Approx(6.0 / 500.0));
    CHECK(w->steps_elapsed() < t.max_steps());
    CHECK(w->fitness() == doctest::Approx(gate_fitness(4, w->steps_elapsed(), 500, 4)));
}

TEST_CASE("gate escape ends after the grace period once the gate shut")
{
    GateEscapeParams p;
    p.close_delay = 10;
    p.grace_steps = 4;
    const GateEscapeTask t(p);
    const auto spec = spec_for(t);
    Controller forward(constant_genome(spec, 20.0, 20.0), spec);
    // One robot under the gate, three facing the bottom wall.
    std::vector<sim::RobotBody> starts{pose(0.0, 0.9, pi / 2.0), pose(-0.5, -0.5, -pi / 2.0),
                                       pose(0.0, -0.5, -pi / 2.0), pose(0.5, -0.5, -pi / 2.0)};
    auto w = t.create_world(starts);
    run_to_end(*w, forward);
    CHECK(w->steps_elapsed() == 6 + 10 + 4);
    CHECK(w->task_specific()[0] == 0.25);
}

TEST_CASE("resource sharing with idle robots")
{
    const ResourceSharingTask t;
    const auto spec = spec_for(t);
    Controller idle(constant_genome(spec, 0.0, 0.0), spec);
    // Nobody on the station: everyone starves after 100 / 0.2 steps.
    std::vector<sim::RobotBody> starts{pose(-0.7, -0.7, 0.0), pose(0.7, -0.7, 0.0), pose(-0.7, 0.7, 0.0),
                                       pose(0.7, 0.7, 0.0)};
    auto w = t.create_world(starts);
    std::size_t previous = 4;
    while (!w->done()) {
        w->step(idle);
        const auto s = t.snapshot(*w);
        CHECK(s.groups[0].entities.size() <= previous);
        previous = s.groups[0].entities.size();
    }
    CHECK(w->steps_elapsed() == 500);
    const auto ts = w->task_specific();
    CHECK(ts[0] == 0.0);
    CHECK(ts[2] == 0.0);
    CHECK(ts[3] == doctest::Approx(std::hypot(0.7, 0.7) / std::sqrt(2.0)).epsilon(1e-9));
    // Mean energy over N * tau: 4 robots * sum_{k=1..500} (100 - 0.2 k) / (4 * 1000).
    double energy = 0.0;
    for (int k = 1; k < 500; ++k)
        energy += 100.0 - 0.2 * k;
    CHECK(w->fitness() == doctest::Approx(sharing_fitness(0, energy / 1000.0, 100.0, 4)).epsilon(1e-9));
}

TEST_CASE("a robot parked on the charger survives at distance zero")
{
    ResourceSharingParams p;
    p.robots = 1;
    const ResourceSharingTask t(p);
    const auto spec = spec_for(t);
    Controller idle(constant_genome(spec, 0.0, 0.0), spec);
    std::vector<sim::RobotBody> starts{pose(0.0, 0.0, 0.0)};
    auto w = t.create_world(starts);
    run_to_end(*w, idle);
    CHECK(w->steps_elapsed() == t.max_steps());
    const auto ts = w->task_specific();
    CHECK(ts[0] == 1.0);
    CHECK(ts[1] == 1.0);
    CHECK(ts[3] == doctest::Approx(0.0));
    CHECK(w->fitness() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("the station holds at most one robot")
{
    const ResourceSharingTask t;
    const auto spec = spec_for(t);
    std::mt19937_64 rng(15);
    for (int rep = 0; rep < 30; ++rep) {
        const auto g = random_genome(spec, rng, 2.0);
        Controller c(g, spec);
        // Everyone starts near the station.
        std::vector<sim::RobotBody> starts{pose(0.06, 0.0, 0.0), pose(-0.06, 0.0, pi), pose(0.0, 0.12, 1.0),
                                           pose(0.0, -0.12, -1.0)};
        auto w = t.create_world(starts);
        while (!w->done()) {
            w->step(c);
            const auto s = t.snapshot(*w);
            std::size_t charging = 0;
            for (const auto& e : s.groups[0].entities)
                charging += e.theta[5] == 1.0;
            REQUIRE(charging <= 1);
            CHECK(s.groups[1].entities[0].theta[0] == (charging == 1 ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("prey policy")
{
    const auto prey = pose(0.0, 0.0, 0.3);
    std::vector<sim::RobotBody> far{pose(5.0, 0.0, 0.0)};
    const auto none = prey_policy(prey, far, 0.5);
    CHECK_FALSE(none.move);
    CHECK(none.speed == 0.0);

    std::vector<sim::RobotBody> east{pose(0.3, 0.0, 0.0)};
    const auto west = prey_policy(prey, east, 0.5);
    CHECK(west.move);
    CHECK(west.speed == 1.0);
    CHECK(std::abs(std::abs(west.heading) - pi) < 1e-12);

    std::vector<sim::RobotBody> pair{pose(0.3, 0.3, 0.0), pose(0.3, -0.3, 0.0)};
    CHECK(std::abs(std::abs(prey_policy(prey, pair, 0.5).heading) - pi) < 1e-12);

    std::vector<sim::RobotBody> above{pose(-0.2, 0.2, 0.0), pose(0.2, 0.2, 0.0)};
    CHECK(prey_policy(prey, above, 0.5).heading == doctest::Approx(-pi / 2.0));
}

TEST_CASE("capture on the first step")
{
    const PredatorPreyTask t;
    const auto spec = spec_for(t);
    Controller idle(constant_genome(spec, 0.0, 0.0), spec);
    // Prey flees along its heading (the predator mean coincides with it) into predator 0.
    std::vector<sim::RobotBody> preds;
    for (int i = 0; i < 3; ++i) {
        const double a = 2.0 * pi * i / 3.0;
        preds.push_back(pose(0.115 * std::cos(a), 0.115 * std::sin(a), 0.0));
    }
    auto w = t.create_world(preds, pose(0.0, 0.0, 0.0));
    w->step(idle);
    CHECK(w->done());
    const auto ts = w->task_specific();
    CHECK(ts[0] == 1.0);
    CHECK(ts[1] == doctest::Approx(1.0 / 600.0));
    CHECK(ts[2] < 0.02);
    const double diag = t.params().arena_size * std::numbers::sqrt2;
    // Contact pushes predator 0 back, so the oracle uses the post-step positions.
    const auto b = w->bodies();
    const double cx = (b[0].position.x + b[1].position.x + b[2].position.x) / 3.0;
    const double cy = (b[0].position.y + b[1].position.y + b[2].position.y) / 3.0;
    double spread = 0.0;
    for (int i = 0; i < 3; ++i)
        spread += std::hypot(b[i].position.x - cx, b[i].position.y - cy);
    CHECK(ts[3] == doctest::Approx(spread / 3.0 / (diag / 2.0)).epsilon(1e-9));
    CHECK(w->fitness() == doctest::Approx(2.0 - 1.0 / 600.0));
    // After capture the prey group is empty in the canonical layout.
    CHECK(t.snapshot(*w).groups[1].entities.empty());
}

TEST_CASE("stationary predators and an unsensed prey run the full trial")
{
    const PredatorPreyTask t;
    const auto spec = spec_for(t);
    Controller idle(constant_genome(spec, 0.0, 0.0), spec);
    auto w = t.create_world(5);
    const auto prey0 = w->bodies().back().position;
    while (!w->done()) {
        w->step(idle);
        REQUIRE(w->bodies().back().position == prey0);
    }
    CHECK(w->task_specific()[1] == 1.0);
    CHECK(w->task_specific()[0] == 0.0);
    CHECK(w->fitness() == 0.0);
}

TEST_CASE("pursuit ends when the prey leaves the chase zone")
{
    const PredatorPreyTask t;
    const auto spec = spec_for(t);
    Controller idle(constant_genome(spec, 0.0, 0.0), spec);
    std::vector<sim::RobotBody> preds{pose(2.6, 0.0, 0.0), pose(-2.0, 0.0, 0.0), pose(0.0, -2.0, 0.0)};
    auto w = t.create_world(preds, pose(2.9, 0.0, 0.0));
    run_to_end(*w, idle);
    CHECK(w->steps_elapsed() < 10);
    CHECK(w->task_specific()[0] == 0.0);
    CHECK(std::hypot(w->bodies().back().position.x, w->bodies().back().position.y) > 3.0);
}

TEST_CASE("random pursuit starts keep the prey out of sensing range")
{
    const PredatorPreyTask t;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto w = t.create_world(seed);
        const auto b = w->bodies();
        const auto prey = b.back().position;
        const double r = std::hypot(prey.x, prey.y);
        CHECK(r >= t.params().prey_start_min - 1e-12);
        CHECK(r <= t.params().prey_start_max + 1e-12);
        for (std::size_t i = 0; i + 1 < b.size(); ++i)
            CHECK(sim::distance(b[i].position, prey) > t.params().prey_sense_range);
    }
}

TEST_CASE("geometric distance between entity shapes")
{
    EntityState p{{1.0, 2.0}, {}};
    EntityState q{{}, shape_props(Shape::fixed_point, std::vector<double>{4.0, 6.0})};
    CHECK(geometric_distance(p, q) == doctest::Approx(5.0));
    CHECK(geometric_distance(q, p) == doctest::Approx(5.0));

    EntityState wall{{}, shape_props(Shape::segments, std::vector<double>{0.0, 0.0, 10.0, 0.0})};
    CHECK(geometric_distance(p, wall) == doctest::Approx(2.0));

    EntityState circle{{}, shape_props(Shape::circle, std::vector<double>{0.0, 0.0, 3.0})};
    EntityState inside{{0.0, 1.0}, {}};
    CHECK(geometric_distance(inside, circle) == doctest::Approx(2.0));
    EntityState crossing{{}, shape_props(Shape::segments, std::vector<double>{-5.0, 0.0, 5.0, 0.0})};
    CHECK(geometric_distance(crossing, circle) == 0.0);
}
