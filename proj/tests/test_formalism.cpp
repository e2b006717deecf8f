#include "sdbc/errors.hpp"
#include "sdbc/formalism.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace sdbc;

namespace {

EntityState at(double x, double y) { return {{x, y}, {}}; }

double euclid(const EntityState& a, const EntityState& b)
{
    return std::hypot(a.theta[0] - b.theta[0], a.theta[1] - b.theta[1]);
}

EntityGroup group(std::string name, std::size_t kappa, std::size_t lo, std::size_t hi, std::vector<EntityState> es = {})
{
    EntityGroup g;
    g.name = std::move(name);
    for (std::size_t i = 0; i < kappa; ++i)
        g.attributes.push_back("a" + std::to_string(i));
    g.eta_min = lo;
    g.eta_max = hi;
    g.entities = std::move(es);
    return g;
}

std::vector<EntityState> random_entities(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<EntityState> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(at(u(rng), u(rng)));
    return out;
}

// Count predicted by the skip rules from declarations alone.
std::size_t predicted_features(const TaskStateSnapshot& s)
{
    std::size_t n = 0;
    for (const auto& g : s.groups) {
        n += g.eta_max > g.eta_min ? 1 : 0;
        n += g.kappa();
        n += g.eta_max > 1 ? 1 : 0;
    }
    for (std::size_t i = 0; i < s.groups.size(); ++i)
        for (std::size_t j = i + 1; j < s.groups.size(); ++j)
            n += s.pair_excluded(i, j) ? 0 : 1;
    return n;
}

} // namespace

TEST_CASE("group size feature")
{
    auto g = group("g", 1, 0, 5);
    g.entities.assign(3, EntityState{{0.0}, {}});
    CHECK(group_size_feature(g) == doctest::Approx(0.6).epsilon(1e-15));
    g.entities.clear();
    CHECK(group_size_feature(g) == 0.0);
    g.entities.assign(5, EntityState{{0.0}, {}});
    CHECK(group_size_feature(g) == 1.0);

    auto fixed = group("f", 1, 2, 2);
    CHECK_THROWS_AS(group_size_feature(fixed), DegenerateGroupError);
}

TEST_CASE("group size is invariant under relabelling")
{
    std::mt19937_64 rng(3);
    auto g = group("g", 2, 1, 9, random_entities(rng, 6));
    const double before = group_size_feature(g);
    std::shuffle(g.entities.begin(), g.entities.end(), rng);
    CHECK(group_size_feature(g) == before);
}

TEST_CASE("group mean state")
{
    auto one = group("g", 2, 0, 3, {EntityState{{0.2, 7.0}, {}}});
    CHECK(group_mean_state(one) == std::vector<double>{0.2, 7.0});

    auto two = group("g", 2, 0, 3, {EntityState{{0.0, 2.0}, {}}, EntityState{{2.0, 4.0}, {}}});
    CHECK(group_mean_state(two) == std::vector<double>{1.0, 3.0});

    CHECK_THROWS_AS(group_mean_state(group("g", 2, 0, 3)), EmptyGroupError);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int rep = 0; rep < 50; ++rep) {
        auto g = group("g", 3, 0, 5);
        for (int i = 0; i < 5; ++i)
            g.entities.push_back(EntityState{{u(rng), u(rng), u(rng)}, {}});
        const auto mean = group_mean_state(g);
        for (std::size_t k = 0; k < 3; ++k) {
            long double s = 0.0L;
            for (const auto& e : g.entities)
                s += e.theta[k];
            CHECK(mean[k] == doctest::Approx(static_cast<double>(s / 5.0L)).epsilon(1e-12));
        }
    }
}

TEST_CASE("group dispersion uses the (|g|-1)^2 denominator")
{
    auto two = group("g", 2, 0, 4, {at(0, 0), at(4, 0)});
    CHECK(group_dispersion(two, euclid) == doctest::Approx(8.0).epsilon(1e-15));

    const double h = std::sqrt(3.0) / 2.0;
    auto tri = group("g", 2, 0, 4, {at(0, 0), at(1, 0), at(0.5, h)});
    CHECK(group_dispersion(tri, euclid) == doctest::Approx(1.5).epsilon(1e-12));

    auto same = group("g", 2, 0, 4, {at(1, 1), at(1, 1), at(1, 1)});
    CHECK(group_dispersion(same, euclid) == 0.0);

    CHECK_THROWS_AS(group_dispersion(group("g", 2, 0, 4, {at(0, 0)}), euclid), EmptyGroupError);
    CHECK_THROWS_AS(group_dispersion(group("g", 2, 0, 4), euclid), EmptyGroupError);
}

TEST_CASE("group pair distance")
{
    auto constant = [](const EntityState&, const EntityState&) { return 3.5; };
    auto a = group("a", 2, 0, 4, {at(0, 0)});
    auto b = group("b", 2, 0, 4, {at(1, 0)});
    CHECK(group_pair_distance(a, b, constant) == 3.5);

    auto a2 = group("a", 2, 0, 4, {at(2, 0), at(4, 0)});
    auto origin = group("b", 2, 0, 4, {at(0, 0)});
    CHECK(group_pair_distance(a2, origin, euclid) == doctest::Approx(3.0).epsilon(1e-15));

    CHECK_THROWS_AS(group_pair_distance(a, group("e", 2, 0, 4), euclid), EmptyGroupError);

    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        auto ga = group("a", 2, 0, 9, random_entities(rng, 3));
        auto gb = group("b", 2, 0, 9, random_entities(rng, 4));
        double sum = 0.0;
        for (const auto& x : ga.entities)
            for (const auto& y : gb.entities)
                sum += std::sqrt((x.theta[0] - y.theta[0]) * (x.theta[0] - y.theta[0]) +
                                 (x.theta[1] - y.theta[1]) * (x.theta[1] - y.theta[1]));
        CHECK(group_pair_distance(ga, gb, euclid) == doctest::Approx(sum / 12.0).epsilon(1e-12));
        CHECK(group_pair_distance(ga, gb, euclid) == doctest::Approx(group_pair_distance(gb, ga, euclid)).epsilon(1e-12));
    }
}

TEST_CASE("scaling distances scales dispersion and pair distance")
{
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 100; ++rep) {
        const double c = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
        auto scaled = [c](const EntityState& a, const EntityState& b) { return c * euclid(a, b); };
        auto ga = group("a", 2, 0, 9, random_entities(rng, 4));
        auto gb = group("b", 2, 0, 9, random_entities(rng, 3));
        CHECK(group_dispersion(ga, scaled) == doctest::Approx(c * group_dispersion(ga, euclid)).epsilon(1e-12));
        CHECK(group_pair_distance(ga, gb, scaled) ==
              doctest::Approx(c * group_pair_distance(ga, gb, euclid)).epsilon(1e-12));
    }
}

TEST_CASE("extract_features emission order and skip rules")
{
    TaskStateSnapshot s;
    s.distance = euclid;
    s.groups.push_back(group("robot", 2, 0, 3, {at(0, 0), at(3, 4)}));
    s.groups.push_back(group("beacon", 2, 1, 1, {at(0, 0)}));
    const auto f = extract_features(s);
    REQUIRE(f.schema);
    CHECK(f.schema->names == std::vector<std::string>{"robot group size", "robot a0", "robot a1", "beacon a0",
                                                      "beacon a1", "robot dispersion", "robot-beacon distance"});
    REQUIRE(f.values.size() == 7);
    CHECK(f.values[0] == doctest::Approx(2.0 / 3.0));
    CHECK(f.values[1] == 1.5);
    CHECK(f.values[2] == 2.0);
    CHECK(f.values[5] == doctest::Approx(10.0)); // 2 * 5 / 1
    CHECK(f.values[6] == doctest::Approx(2.5));

    TaskStateSnapshot single;
    single.distance = euclid;
    single.groups.push_back(group("wall", 0, 1, 1, {EntityState{}}));
    CHECK(extract_features(single).values.empty());
}

TEST_CASE("feature count matches the skip rules for random declarations")
{
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::size_t> kappa(0, 4), lo(0, 3), span(0, 3), groups(1, 5);
    for (int rep = 0; rep < 300; ++rep) {
        TaskStateSnapshot s;
        s.distance = [](const EntityState&, const EntityState&) { return 1.0; };
        const std::size_t n = groups(rng);
        for (std::size_t g = 0; g < n; ++g) {
            const std::size_t l = lo(rng);
            auto grp = group("g" + std::to_string(g), kappa(rng), l, std::max<std::size_t>(1, l + span(rng)));
            grp.entities.assign(grp.eta_max, EntityState{std::vector<double>(grp.kappa(), 0.5), {}});
            s.groups.push_back(std::move(grp));
        }
        if (n > 1 && rep % 2 == 0)
            s.excluded_pairs.push_back({0, n - 1});
        CHECK(feature_schema(s).size() == predicted_features(s));
        CHECK(extract_features(s).values.size() == predicted_features(s));
    }
}

TEST_CASE("empty groups carry the previous value forward")
{
    TaskStateSnapshot s;
    s.distance = euclid;
    s.groups.push_back(group("a", 2, 0, 2, {at(1, 1)}));
    s.groups.push_back(group("b", 2, 0, 2));
    FeatureExtractor fx(s);
    // a size, b size, a0, a1, b0, b1, a disp, b disp, a-b distance
    auto v0 = fx.extract(s).values;
    CHECK(v0[1] == 0.0);
    CHECK(v0[4] == 0.0);   // first-step empty reads 0
    CHECK(v0[6] == 0.0);   // singleton dispersion
    CHECK(v0[8] == 0.0);

    s.groups[1].entities = {at(4, 5)};
    auto v1 = fx.extract(s).values;
    CHECK(v1[4] == 4.0);
    CHECK(v1[8] == doctest::Approx(5.0));

    s.groups[1].entities.clear();
    s.groups[0].entities = {at(0, 0), at(2, 0)};
    auto v2 = fx.extract(s).values;
    CHECK(v2[1] == 0.0);          // size is always defined
    CHECK(v2[4] == 4.0);          // carried
    CHECK(v2[5] == 5.0);          // carried
    CHECK(v2[8] == doctest::Approx(5.0)); // carried
    CHECK(v2[6] == doctest::Approx(4.0));

}

TEST_CASE("schema is identical across snapshots of one simulation")
{
    TaskStateSnapshot s;
    s.distance = euclid;
    s.groups.push_back(group("a", 2, 0, 3, {at(1, 1)}));
    FeatureExtractor fx(s);
    const auto first = fx.extract(s);
    s.groups[0].entities = {at(0, 0), at(1, 1), at(2, 2)};
    const auto second = fx.extract(s);
    CHECK(first.schema_id() == second.schema_id());
    CHECK(first.schema == second.schema);
}

TEST_CASE("entity group validation")
{
    auto g = group("g", 2, 1, 2);
    CHECK_THROWS(g.validate());
    g.entities = {at(0, 0)};
    CHECK_NOTHROW(g.validate());
    g.entities = {EntityState{{1.0}, {}}};
    CHECK_THROWS(g.validate());
}
