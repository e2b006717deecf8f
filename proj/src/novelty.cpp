#include "sdbc/novelty.hpp"

#include "sdbc/characterisation.hpp"
#include "sdbc/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sdbc {

double novelty_score(const ScoredIndividual& target, std::span<const ScoredIndividual> population,
                     std::span<const std::vector<double>> archive_view, std::size_t k)
{
    if (k == 0)
        throw std::invalid_argument("novelty_score: k must be >= 1");
    std::vector<double> distances;
    distances.reserve(population.size() + archive_view.size());
    for (const auto& other : population)
        if (other.id != target.id)
            distances.push_back(behaviour_distance(target.characterisation, other.characterisation));
    for (const auto& a : archive_view)
        distances.push_back(behaviour_distance(target.characterisation, a));
    if (distances.empty())
        throw std::invalid_argument("novelty_score: empty neighbour pool");

    const std::size_t m = std::min(k, distances.size());
    std::partial_sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(m), distances.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        sum += distances[i];
    return sum / static_cast<double>(m);
}

void score_population(std::span<ScoredIndividual> population, std::span<const std::vector<double>> archive_view,
                      std::size_t k, std::size_t workers)
{
    std::vector<double> scores(population.size());
    parallel_for(population.size(), workers, [&](std::size_t i) {
        scores[i] = novelty_score(population[i], population, archive_view, k);
    });
    for (std::size_t i = 0; i < population.size(); ++i)
        population[i].novelty = scores[i];
}

void update_archive(NoveltyArchive& archive, std::span<const ArchiveCandidate> candidates, std::size_t generation,
                    std::mt19937_64& rng, double rate)
{
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("update_archive: rate must lie in [0, 1]");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& c : candidates) {
        const double draw = u(rng);
        if (draw < rate)
            archive.add(ArchiveEntry{c.id, *c.raw, generation});
    }
}

bool dominates(const Objectives& a, const Objectives& b) noexcept
{
    return a.fitness >= b.fitness && a.novelty >= b.novelty && (a.fitness > b.fitness || a.novelty > b.novelty);
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Objectives> points)
{
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (dominates(points[p], points[q]))
                dominated[p].push_back(q);
            else if (dominates(points[q], points[p]))
                ++domination_count[p];
        }
        if (domination_count[p] == 0)
            current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : current)
            for (std::size_t q : dominated[p])
                if (--domination_count[q] == 0)
                    next.push_back(q);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const Objectives> front)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = front.size();
    std::vector<double> distance(n, 0.0);
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), inf);
        return distance;
    }
    std::vector<std::size_t> order(n);
    auto accumulate_objective = [&](auto key) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(front[a]) < key(front[b]); });
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        const double range = key(front[order.back()]) - key(front[order.front()]);
        if (range <= 0.0)
            return;
        for (std::size_t i = 1; i + 1 < n; ++i)
            distance[order[i]] += (key(front[order[i + 1]]) - key(front[order[i - 1]])) / range;
    };
    accumulate_objective([](const Objectives& o) { return o.fitness; });
    accumulate_objective([](const Objectives& o) { return o.novelty; });
    return distance;
}

std::vector<std::size_t> rank_population(std::span<const ScoredIndividual> individuals)
{
    std::vector<Objectives> points;
    points.reserve(individuals.size());
    for (const auto& ind : individuals)
        points.push_back({ind.fitness, ind.novelty});

    std::vector<std::size_t> order;
    order.reserve(individuals.size());
    for (const auto& front : non_dominated_sort(points)) {
        std::vector<Objectives> front_points;
        front_points.reserve(front.size());
        for (std::size_t i : front)
            front_points.push_back(points[i]);
        const auto crowding = crowding_distance(front_points);
        std::vector<std::size_t> local(front.size());
        std::iota(local.begin(), local.end(), std::size_t{0});
        std::sort(local.begin(), local.end(), [&](std::size_t a, std::size_t b) {
            if (crowding[a] != crowding[b])
                return crowding[a] > crowding[b];
            return individuals[front[a]].id < individuals[front[b]].id;
        });
        for (std::size_t i : local)
            order.push_back(front[i]);
    }
    return order;
}

std::vector<std::size_t> rank_by_fitness(std::span<const ScoredIndividual> individuals)
{
    std::vector<std::size_t> order(individuals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (individuals[a].fitness != individuals[b].fitness)
            return individuals[a].fitness > individuals[b].fitness;
        return individuals[a].id < individuals[b].id;
    });
    return order;
}

} // namespace sdbc
