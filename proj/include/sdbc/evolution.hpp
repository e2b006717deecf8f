#pragma once

// Generational GA over directly encoded controller weights, trial evaluation,
// and the per-generation pipeline: standardise -> weight -> novelty -> rank ->
// archive -> breed.

#include "sdbc/characterisation.hpp"
#include "sdbc/controller.hpp"
#include "sdbc/novelty.hpp"
#include "sdbc/tasks.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace sdbc {

// ---- seeding ---------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Hash of (master, a, b, c); used for per-trial seeds so that evaluation
/// order cannot change results.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept;

/// Seeds of the trials of individual `index` in `generation`.
std::vector<std::uint64_t> trial_seeds(std::uint64_t master, std::uint64_t generation, std::uint64_t index,
                                       std::size_t trials);

// ---- operators -------------------------------------------------------------

inline constexpr double weight_limit = 10.0;

Genome random_genome(const ControllerSpec& spec, std::mt19937_64& rng, double range = 1.0);

/// Each gene gets N(0, sigma) noise with probability p_gene; results clamped to
/// [-weight_limit, weight_limit].
Genome mutate(const Genome& g, std::mt19937_64& rng, double p_gene, double sigma);

/// Single-point crossover: a[0, cut) followed by b[cut, L), cut uniform in [1, L-1].
Genome crossover(const Genome& a, const Genome& b, std::mt19937_64& rng);
Genome crossover_at(const Genome& a, const Genome& b, std::size_t cut);

// ---- evaluation ------------------------------------------------------------

struct TrialRecord {
    std::uint64_t seed = 0;
    double fitness = 0.0;
    RawCharacterisation sdbc;
    TaskSpecific task_specific{};
    std::size_t steps = 0;
};

/// Per-step trajectory consumer; called after every simulated step.
class TrajectorySink {
public:
    virtual ~TrajectorySink() = default;
    virtual void record(std::size_t step, std::span<const sim::RobotBody> bodies) = 0;
};

/// One simulation from seeded initial conditions, sampling features after every step.
TrialRecord run_trial(const Task& task, Controller& controller, std::uint64_t seed, TrajectorySink* sink = nullptr);
/// Same, on an already constructed world.
TrialRecord run_trial(const Task& task, World& world, Controller& controller, TrajectorySink* sink = nullptr);

struct EvaluationResult {
    double fitness = 0.0;
    RawCharacterisation sdbc;
    TaskSpecific task_specific{};
    std::vector<std::uint64_t> trial_seeds;
    std::vector<double> trial_fitness;
};

/// Runs one trial per seed; returns the trial-mean fitness and characterisations.
/// Failures are rethrown with the trial index and seed.
EvaluationResult evaluate(const Genome& g, const ControllerSpec& spec, const Task& task,
                          std::span<const std::uint64_t> seeds);

// ---- generational loop -----------------------------------------------------

enum class Method { fit, ns_ts, ns_sd, ns_sd_plus };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

struct GaParams {
    std::size_t population = 100;
    std::size_t generations = 250;
    std::size_t elites = 2;
    std::size_t tournament = 2;
    double p_crossover = 0.5;
    double p_mutation = 0.05;
    double sigma = 0.5;
    std::size_t hidden = 8;
    double init_range = 1.0;
};

struct NoveltyParams {
    std::size_t k = 15;
    double archive_rate = 0.025;
};

struct SdbcParams {
    double delta = 0.25;
    MiBinning binning;
    std::size_t weight_period = 1;
};

struct EvolutionConfig {
    Method method = Method::ns_sd_plus;
    GaParams ga;
    NoveltyParams novelty;
    SdbcParams sdbc;
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

struct Individual {
    std::uint64_t id = 0;
    Genome genome;
    EvaluationResult eval;
};

/// Everything computed while scoring one generation.
struct GenerationReport {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double best_so_far = 0.0;
    std::uint64_t best_id = 0;
    std::size_t archive_size = 0;
    std::vector<ScoredIndividual> scored; // population order
    std::vector<std::size_t> rank;        // indices into `scored`, best first
    /// SDBC statistics of the generation (computed for every method).
    StandardisationCoefficients coefficients;
    FeatureWeights weights; // weights actually applied (uniform unless ns-sd+)
    std::vector<double> mi; // MI of each SDBC component with fitness (empty for fit / ns-ts)
};

class Evolution {
public:
    Evolution(const Task& task, EvolutionConfig config);

    /// Random population, evaluated as generation 0.
    void initialise();

    /// Scores and ranks the current generation, then (unless `last`) updates
    /// the archive, breeds and evaluates the next one.
    GenerationReport run_generation(bool last = false);

    std::size_t generation() const noexcept { return generation_; }
    std::span<const Individual> population() const noexcept { return population_; }
    const NoveltyArchive& archive() const noexcept { return archive_; }
    const Individual& best() const noexcept { return best_; }
    const ControllerSpec& spec() const noexcept { return spec_; }
    const EvolutionConfig& config() const noexcept { return config_; }

    /// Text checkpoint of the full state (population, archive, RNG, counters).
    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    void evaluate_population(std::span<Individual> individuals, std::span<const std::size_t> slots);
    std::size_t tournament(std::span<const std::size_t> position_of);

    const Task& task_;
    EvolutionConfig config_;
    ControllerSpec spec_;
    std::mt19937_64 rng_;
    std::vector<Individual> population_;
    NoveltyArchive archive_;
    std::size_t generation_ = 0;
    std::uint64_t next_id_ = 0;
    Individual best_;
    bool has_best_ = false;
    FeatureWeights weights_;
    bool has_weights_ = false;
};

} // namespace sdbc
