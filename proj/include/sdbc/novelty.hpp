#pragma once

// k-nearest-neighbour novelty, the novelty archive, and (fitness, novelty)
// Pareto ranking with crowding distance.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sdbc {

struct ScoredIndividual {
    std::uint64_t id = 0;
    double fitness = 0.0;
    std::vector<double> characterisation; // transformed
    double novelty = 0.0;
};

struct ArchiveEntry {
    std::uint64_t id = 0;
    std::vector<double> raw;
    std::size_t generation = 0;
};

/// Unbounded store of raw characterisations. Transformed views are rebuilt by
/// the caller each generation with the current coefficients.
class NoveltyArchive {
public:
    void add(ArchiveEntry entry) { entries_.push_back(std::move(entry)); }
    std::span<const ArchiveEntry> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    void clear() noexcept { entries_.clear(); }

private:
    std::vector<ArchiveEntry> entries_;
};

/// Mean behaviour distance from `target` to its k nearest members of
/// (population minus the entry with target.id) plus the archive view. A pool
/// smaller than k is averaged whole. Throws std::invalid_argument on k == 0 or
/// an empty pool.
double novelty_score(const ScoredIndividual& target, std::span<const ScoredIndividual> population,
                     std::span<const std::vector<double>> archive_view, std::size_t k);

/// Fills `novelty` for every individual.
void score_population(std::span<ScoredIndividual> population, std::span<const std::vector<double>> archive_view,
                      std::size_t k, std::size_t workers = 1);

struct ArchiveCandidate {
    std::uint64_t id = 0;
    const std::vector<double>* raw = nullptr;
};

/// Appends each candidate independently with probability `rate`. Exactly one
/// uniform draw is consumed per candidate.
void update_archive(NoveltyArchive& archive, std::span<const ArchiveCandidate> candidates, std::size_t generation,
                    std::mt19937_64& rng, double rate);

/// Both objectives are maximised.
struct Objectives {
    double fitness = 0.0;
    double novelty = 0.0;
};

bool dominates(const Objectives& a, const Objectives& b) noexcept;

/// Fronts of indices; front 0 is the non-dominated set. Indices within a front
/// are ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Objectives> points);

/// Crowding distance of each point of one front. Per-objective extremes get
/// +infinity; fronts of size <= 2 are all infinite.
std::vector<double> crowding_distance(std::span<const Objectives> front);

/// Indices ordered by front, then descending crowding distance, then id.
std::vector<std::size_t> rank_population(std::span<const ScoredIndividual> individuals);

/// Indices ordered by descending fitness, then id.
std::vector<std::size_t> rank_by_fitness(std::span<const ScoredIndividual> individuals);

} // namespace sdbc
