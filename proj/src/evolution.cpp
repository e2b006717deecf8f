#include "sdbc/evolution.hpp"

#include "sdbc/errors.hpp"
#include "sdbc/parallel.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sdbc {

std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept
{
    std::uint64_t state = master;
    std::uint64_t h = splitmix64(state);
    for (std::uint64_t v : {a, b, c}) {
        state = h ^ v;
        h = splitmix64(state);
    }
    return h;
}

std::vector<std::uint64_t> trial_seeds(std::uint64_t master, std::uint64_t generation, std::uint64_t index,
                                       std::size_t trials)
{
    std::vector<std::uint64_t> seeds(trials);
    for (std::size_t t = 0; t < trials; ++t)
        seeds[t] = derive_seed(master, generation, index, t);
    return seeds;
}

Genome random_genome(const ControllerSpec& spec, std::mt19937_64& rng, double range)
{
    std::uniform_real_distribution<double> u(-range, range);
    Genome g;
    g.weights.resize(spec.genome_length());
    for (auto& w : g.weights)
        w = u(rng);
    return g;
}

Genome mutate(const Genome& g, std::mt19937_64& rng, double p_gene, double sigma)
{
    if (p_gene < 0.0 || p_gene > 1.0 || sigma <= 0.0)
        throw std::invalid_argument("mutate: need 0 <= p_gene <= 1 and sigma > 0");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, sigma);
    Genome out = g;
    for (auto& w : out.weights)
        if (u(rng) < p_gene)
            w = std::clamp(w + noise(rng), -weight_limit, weight_limit);
    return out;
}

Genome crossover_at(const Genome& a, const Genome& b, std::size_t cut)
{
    require_same_length(a.size(), b.size(), "crossover");
    if (cut > a.size())
        throw std::invalid_argument("crossover: cut beyond genome length");
    Genome child = b;
    std::copy(a.weights.begin(), a.weights.begin() + static_cast<std::ptrdiff_t>(cut), child.weights.begin());
    return child;
}

Genome crossover(const Genome& a, const Genome& b, std::mt19937_64& rng)
{
    require_same_length(a.size(), b.size(), "crossover");
    if (a.size() < 2)
        return a;
    std::uniform_int_distribution<std::size_t> cut(1, a.size() - 1);
    return crossover_at(a, b, cut(rng));
}

TrialRecord run_trial(const Task& task, World& world, Controller& controller, TrajectorySink* sink)
{
    TaskStateSnapshot snapshot = task.layout();
    FeatureExtractor extractor(snapshot);
    FeatureAccumulator accumulator(extractor.schema());
    std::vector<double> features(extractor.size());
    while (!world.done()) {
        world.step(controller);
        world.write_snapshot(snapshot);
        extractor.extract_into(snapshot, features);
        accumulator.add(features);
        if (sink)
            sink->record(world.steps_elapsed(), world.bodies());
    }
    TrialRecord rec;
    rec.fitness = world.fitness();
    rec.sdbc = accumulator.finish(world.steps_elapsed(), world.max_steps());
    rec.task_specific = world.task_specific();
    rec.steps = world.steps_elapsed();
    return rec;
}

TrialRecord run_trial(const Task& task, Controller& controller, std::uint64_t seed, TrajectorySink* sink)
{
    auto world = task.create_world(seed);
    TrialRecord rec = run_trial(task, *world, controller, sink);
    rec.seed = seed;
    return rec;
}

EvaluationResult evaluate(const Genome& g, const ControllerSpec& spec, const Task& task,
                          std::span<const std::uint64_t> seeds)
{
    if (seeds.empty())
        throw std::invalid_argument("evaluate: at least one trial is required");
    Controller controller(g, spec);
    std::vector<RawCharacterisation> chars;
    EvaluationResult out;
    chars.reserve(seeds.size());
    out.trial_seeds.assign(seeds.begin(), seeds.end());
    for (std::size_t t = 0; t < seeds.size(); ++t) {
        try {
            TrialRecord rec = run_trial(task, controller, seeds[t]);
            chars.push_back(std::move(rec.sdbc));
            out.trial_fitness.push_back(rec.fitness);
            for (std::size_t k = 0; k < 4; ++k)
                out.task_specific[k] += rec.task_specific[k];
        }
        catch (const std::exception& e) {
            throw std::runtime_error("trial " + std::to_string(t) + " (seed " + std::to_string(seeds[t]) +
                                     ") failed: " + e.what());
        }
    }
    auto agg = aggregate_trials(chars, out.trial_fitness);
    out.fitness = agg.fitness;
    out.sdbc = std::move(agg.characterisation);
    for (auto& v : out.task_specific)
        v /= static_cast<double>(seeds.size());
    return out;
}

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::fit: return "fit";
    case Method::ns_ts: return "ns-ts";
    case Method::ns_sd: return "ns-sd";
    case Method::ns_sd_plus: return "ns-sd+";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view s)
{
    for (Method m : {Method::fit, Method::ns_ts, Method::ns_sd, Method::ns_sd_plus})
        if (to_string(m) == s)
            return m;
    return std::nullopt;
}

namespace {

bool uses_sdbc(Method m) { return m == Method::ns_sd || m == Method::ns_sd_plus; }

std::vector<double> ts_vector(const TaskSpecific& ts) { return {ts.begin(), ts.end()}; }

} // namespace

Evolution::Evolution(const Task& task, EvolutionConfig config)
    : task_(task), config_(config), spec_{task.sensor_count(), config.ga.hidden, task.effector_count()},
      rng_(derive_seed(config.seed, 0x65766f6cULL))
{
    const auto& ga = config_.ga;
    if (ga.population < 2)
        throw std::invalid_argument("Evolution: population must be >= 2");
    if (ga.elites > ga.population)
        throw std::invalid_argument("Evolution: elites exceed population");
    if (ga.tournament < 1 || config_.trials < 1 || config_.novelty.k < 1 || config_.sdbc.weight_period < 1)
        throw std::invalid_argument("Evolution: tournament, trials, k and weight period must be >= 1");
    auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!probability(ga.p_crossover) || !probability(ga.p_mutation) || !probability(config_.novelty.archive_rate))
        throw std::invalid_argument("Evolution: probabilities must lie in [0, 1]");
    if (!(ga.sigma > 0.0) || !(ga.init_range > 0.0) || config_.sdbc.delta < 0.0)
        throw std::invalid_argument("Evolution: sigma and init range must be > 0, delta >= 0");
}

void Evolution::evaluate_population(std::span<Individual> individuals, std::span<const std::size_t> slots)
{
    parallel_for(slots.size(), config_.workers, [&](std::size_t j) {
        const std::size_t slot = slots[j];
        const auto seeds = trial_seeds(config_.seed, generation_, slot, config_.trials);
        individuals[slot].eval = evaluate(individuals[slot].genome, spec_, task_, seeds);
    });
}

void Evolution::initialise()
{
    generation_ = 0;
    archive_.clear();
    has_best_ = false;
    has_weights_ = false;
    population_.assign(config_.ga.population, Individual{});
    for (auto& ind : population_) {
        ind.id = next_id_++;
        ind.genome = random_genome(spec_, rng_, config_.ga.init_range);
    }
    std::vector<std::size_t> slots(population_.size());
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    evaluate_population(population_, slots);
}

std::size_t Evolution::tournament(std::span<const std::size_t> position_of)
{
    std::uniform_int_distribution<std::size_t> pick(0, position_of.size() - 1);
    std::size_t winner = pick(rng_);
    for (std::size_t t = 1; t < config_.ga.tournament; ++t) {
        const std::size_t c = pick(rng_);
        if (position_of[c] < position_of[winner])
            winner = c;
    }
    return winner;
}

GenerationReport Evolution::run_generation(bool last)
{
    if (population_.empty())
        throw std::logic_error("Evolution::run_generation before initialise");
    const std::size_t n = population_.size();
    const Method method = config_.method;
    GenerationReport report;
    report.generation = generation_;

    std::vector<std::vector<double>> raw(n);
    std::vector<double> fitness(n);
    for (std::size_t i = 0; i < n; ++i) {
        raw[i] = population_[i].eval.sdbc.values;
        fitness[i] = population_[i].eval.fitness;
    }
    report.coefficients = compute_standardisation(raw);
    const std::size_t len = raw.front().size();
    if (uses_sdbc(method)) {
        if (!has_weights_ || generation_ % config_.sdbc.weight_period == 0) {
            weights_ = compute_weights(raw, fitness, config_.sdbc.delta, config_.sdbc.binning);
            has_weights_ = true;
        }
        report.mi = weights_.mi;
    }
    const FeatureWeights applied = method == Method::ns_sd_plus ? weights_ : uniform_weights(len);
    report.weights = applied;

    auto transform = [&](std::span<const double> native) -> std::vector<double> {
        if (method == Method::ns_ts)
            return {native.begin(), native.end()};
        return apply_weights(apply_standardisation(native, report.coefficients), applied);
    };
    auto native_of = [&](const Individual& ind) -> std::vector<double> {
        return method == Method::ns_ts ? ts_vector(ind.eval.task_specific) : ind.eval.sdbc.values;
    };

    report.scored.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = report.scored[i];
        s.id = population_[i].id;
        s.fitness = fitness[i];
        if (method != Method::fit)
            s.characterisation = transform(native_of(population_[i]));
    }
    if (method == Method::fit) {
        report.rank = rank_by_fitness(report.scored);
    }
    else {
        std::vector<std::vector<double>> archive_view;
        archive_view.reserve(archive_.size());
        for (const auto& e : archive_.entries())
            archive_view.push_back(transform(e.raw));
        score_population(report.scored, archive_view, config_.novelty.k, config_.workers);
        report.rank = rank_population(report.scored);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (fitness[i] > fitness[best] || (fitness[i] == fitness[best] && population_[i].id < population_[best].id))
            best = i;
    report.best_fitness = fitness[best];
    report.best_id = population_[best].id;
    report.mean_fitness = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(n);
    if (!has_best_ || fitness[best] > best_.eval.fitness) {
        best_ = population_[best];
        has_best_ = true;
    }
    report.best_so_far = best_.eval.fitness;
    report.archive_size = archive_.size();

    if (last)
        return report;

    if (method != Method::fit) {
        std::vector<std::vector<double>> natives(n);
        std::vector<ArchiveCandidate> candidates(n);
        for (std::size_t i = 0; i < n; ++i) {
            natives[i] = native_of(population_[i]);
            candidates[i] = {population_[i].id, &natives[i]};
        }
        update_archive(archive_, candidates, generation_, rng_, config_.novelty.archive_rate);
    }

    std::vector<std::size_t> position_of(n);
    for (std::size_t r = 0; r < n; ++r)
        position_of[report.rank[r]] = r;

    std::vector<Individual> next;
    next.reserve(n);
    const std::size_t elites = std::min(config_.ga.elites, n);
    for (std::size_t r = 0; r < elites; ++r)
        next.push_back(population_[report.rank[r]]);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> fresh;
    while (next.size() < n) {
        const Genome& a = population_[tournament(position_of)].genome;
        Genome child;
        if (u(rng_) < config_.ga.p_crossover) {
            const Genome& b = population_[tournament(position_of)].genome;
            child = crossover(a, b, rng_);
        }
        else {
            child = a;
        }
        fresh.push_back(next.size());
        next.push_back(Individual{next_id_++, mutate(child, rng_, config_.ga.p_mutation, config_.ga.sigma), {}});
    }
    ++generation_;
    evaluate_population(next, fresh);
    population_ = std::move(next);
    return report;
}

// ---- checkpointing ---------------------------------------------------------

namespace {

constexpr std::string_view checkpoint_magic = "sdbc-checkpoint-v1";

void write_values(std::ostream& out, std::span<const double> v)
{
    out << v.size();
    for (double x : v)
        out << ' ' << x;
    out << '\n';
}

std::vector<double> read_values(std::istream& in)
{
    std::size_t n = 0;
    in >> n;
    std::vector<double> v(n);
    for (auto& x : v)
        in >> x;
    return v;
}

void expect(std::istream& in, std::string_view token)
{
    std::string got;
    in >> got;
    if (!in || got != token)
        throw std::runtime_error("checkpoint: expected '" + std::string(token) + "', got '" + got + "'");
}

void write_individual(std::ostream& out, const Individual& ind)
{
    out << "individual " << ind.id << '\n';
    write_values(out, ind.genome.weights);
    out << ind.eval.fitness << '\n';
    write_values(out, ind.eval.sdbc.values);
    write_values(out, ind.eval.task_specific);
    out << ind.eval.trial_seeds.size();
    for (auto s : ind.eval.trial_seeds)
        out << ' ' << s;
    out << '\n';
    write_values(out, ind.eval.trial_fitness);
}

Individual read_individual(std::istream& in, const std::shared_ptr<const CharacterisationSchema>& schema)
{
    Individual ind;
    expect(in, "individual");
    in >> ind.id;
    ind.genome.weights = read_values(in);
    in >> ind.eval.fitness;
    ind.eval.sdbc.values = read_values(in);
    ind.eval.sdbc.schema = schema;
    const auto ts = read_values(in);
    if (ts.size() != 4)
        throw std::runtime_error("checkpoint: bad task-specific characterisation");
    std::copy(ts.begin(), ts.end(), ind.eval.task_specific.begin());
    std::size_t seeds = 0;
    in >> seeds;
    ind.eval.trial_seeds.resize(seeds);
    for (auto& s : ind.eval.trial_seeds)
        in >> s;
    ind.eval.trial_fitness = read_values(in);
    return ind;
}

} // namespace

void Evolution::save(std::ostream& out) const
{
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    out << checkpoint_magic << '\n';
    out << "method " << to_string(config_.method) << '\n';
    out << "generation " << generation_ << '\n';
    out << "next_id " << next_id_ << '\n';
    out << "rng " << rng_ << '\n';
    out << "weights " << (has_weights_ ? 1 : 0) << ' ' << weights_.delta << '\n';
    write_values(out, weights_.weights);
    write_values(out, weights_.mi);
    out << "best " << (has_best_ ? 1 : 0) << '\n';
    if (has_best_)
        write_individual(out, best_);
    out << "population " << population_.size() << '\n';
    for (const auto& ind : population_)
        write_individual(out, ind);
    out << "archive " << archive_.size() << '\n';
    for (const auto& e : archive_.entries()) {
        out << e.id << ' ' << e.generation << ' ';
        write_values(out, e.raw);
    }
    out << "end\n";
    out.flags(flags);
    out.precision(precision);
}

void Evolution::load(std::istream& in)
{
    const auto schema = characterisation_schema(feature_schema(task_.layout()));
    expect(in, checkpoint_magic);
    expect(in, "method");
    std::string method;
    in >> method;
    if (parse_method(method) != config_.method)
        throw std::runtime_error("checkpoint: method '" + method + "' differs from the configuration");
    expect(in, "generation");
    in >> generation_;
    expect(in, "next_id");
    in >> next_id_;
    expect(in, "rng");
    in >> rng_;
    expect(in, "weights");
    int flag = 0;
    in >> flag >> weights_.delta;
    has_weights_ = flag != 0;
    weights_.weights = read_values(in);
    weights_.mi = read_values(in);
    expect(in, "best");
    in >> flag;
    has_best_ = flag != 0;
    if (has_best_)
        best_ = read_individual(in, schema);
    expect(in, "population");
    std::size_t n = 0;
    in >> n;
    population_.clear();
    for (std::size_t i = 0; i < n; ++i)
        population_.push_back(read_individual(in, schema));
    expect(in, "archive");
    in >> n;
    archive_.clear();
    for (std::size_t i = 0; i < n; ++i) {
        ArchiveEntry e;
        in >> e.id >> e.generation;
        e.raw = read_values(in);
        archive_.add(std::move(e));
    }
    expect(in, "end");
    if (!in)
        throw std::runtime_error("checkpoint: truncated or malformed");
    for (const auto& ind : population_)
        if (ind.genome.size() != spec_.genome_length())
            throw std::runtime_error("checkpoint: genome length does not match the controller spec");
}

} // namespace sdbc
