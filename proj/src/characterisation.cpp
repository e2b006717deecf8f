#include "sdbc/characterisation.hpp"

#include "sdbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sdbc {

std::shared_ptr<const CharacterisationSchema> characterisation_schema(const FeatureSchema& features)
{
    auto schema = std::make_shared<CharacterisationSchema>();
    schema->feature_count = features.size();
    schema->names.reserve(2 * features.size() + 1);
    for (const auto& n : features.names)
        schema->names.push_back(n + " (M)");
    for (const auto& n : features.names)
        schema->names.push_back(n + " (F)");
    schema->names.push_back("simulation length");
    schema->id = schema_hash(schema->names);
    return schema;
}

namespace {

void check_steps(std::size_t steps_elapsed, std::size_t max_steps)
{
    if (steps_elapsed < 1 || steps_elapsed > max_steps)
        throw std::invalid_argument("aggregate: steps_elapsed must lie in [1, max_steps]");
}

} // namespace

RawCharacterisation aggregate(std::span<const FeatureSnapshot> samples, std::size_t steps_elapsed,
                              std::size_t max_steps)
{
    if (samples.empty())
        throw std::invalid_argument("aggregate: no feature samples");
    check_steps(steps_elapsed, max_steps);
    const auto& first = samples.front();
    const std::size_t f = first.values.size();
    for (const auto& s : samples)
        if (s.schema_id() != first.schema_id() || s.values.size() != f)
            throw SchemaMismatchError("aggregate: feature samples disagree on schema");

    RawCharacterisation out;
    if (first.schema)
        out.schema = characterisation_schema(*first.schema);
    out.values.assign(2 * f + 1, 0.0);
    for (const auto& s : samples)
        for (std::size_t k = 0; k < f; ++k)
            out.values[k] += s.values[k];
    const double n = static_cast<double>(samples.size());
    for (std::size_t k = 0; k < f; ++k) {
        out.values[k] /= n;
        out.values[f + k] = samples.back().values[k];
    }
    out.values[2 * f] = static_cast<double>(steps_elapsed) / static_cast<double>(max_steps);
    return out;
}

FeatureAccumulator::FeatureAccumulator(std::shared_ptr<const FeatureSchema> features)
    : schema_(characterisation_schema(*features)), sum_(features->size(), 0.0), last_(features->size(), 0.0)
{
}

void FeatureAccumulator::add(std::span<const double> values)
{
    if (values.size() != sum_.size())
        throw SchemaMismatchError("FeatureAccumulator: sample length differs from schema");
    for (std::size_t k = 0; k < values.size(); ++k)
        sum_[k] += values[k];
    std::copy(values.begin(), values.end(), last_.begin());
    ++count_;
}

RawCharacterisation FeatureAccumulator::finish(std::size_t steps_elapsed, std::size_t max_steps) const
{
    if (count_ == 0)
        throw std::invalid_argument("aggregate: no feature samples");
    check_steps(steps_elapsed, max_steps);
    const std::size_t f = sum_.size();
    RawCharacterisation out{std::vector<double>(2 * f + 1), schema_};
    const double n = static_cast<double>(count_);
    for (std::size_t k = 0; k < f; ++k) {
        out.values[k] = sum_[k] / n;
        out.values[f + k] = last_[k];
    }
    out.values[2 * f] = static_cast<double>(steps_elapsed) / static_cast<double>(max_steps);
    return out;
}

TrialAggregate aggregate_trials(std::span<const RawCharacterisation> per_trial, std::span<const double> per_trial_fitness)
{
    if (per_trial.empty())
        throw std::invalid_argument("aggregate_trials: no trials");
    require_same_length(per_trial.size(), per_trial_fitness.size(), "aggregate_trials");
    const auto& first = per_trial.front();
    for (const auto& t : per_trial) {
        const bool same_schema = (t.schema && first.schema) ? t.schema->id == first.schema->id : t.schema == first.schema;
        if (!same_schema || t.size() != first.size())
            throw SchemaMismatchError("aggregate_trials: trials disagree on schema");
    }
    TrialAggregate out;
    out.characterisation.schema = first.schema;
    out.characterisation.values.assign(first.size(), 0.0);
    for (const auto& t : per_trial)
        for (std::size_t k = 0; k < t.size(); ++k)
            out.characterisation.values[k] += t.values[k];
    const double n = static_cast<double>(per_trial.size());
    for (auto& v : out.characterisation.values)
        v /= n;
    out.fitness = std::accumulate(per_trial_fitness.begin(), per_trial_fitness.end(), 0.0) / n;
    return out;
}

StandardisationCoefficients compute_standardisation(std::span<const std::vector<double>> population)
{
    if (population.empty())
        throw std::invalid_argument("compute_standardisation: empty population");
    const std::size_t len = population.front().size();
    for (const auto& b : population)
        require_same_length(b.size(), len, "compute_standardisation");
    const double n = static_cast<double>(population.size());
    StandardisationCoefficients c{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
    for (const auto& b : population)
        for (std::size_t k = 0; k < len; ++k)
            c.mu[k] += b[k];
    for (auto& m : c.mu)
        m /= n;
    for (const auto& b : population)
        for (std::size_t k = 0; k < len; ++k) {
            const double d = b[k] - c.mu[k];
            c.sigma[k] += d * d;
        }
    for (auto& s : c.sigma)
        s = std::sqrt(s / n);
    return c;
}

StandardisationCoefficients compute_standardisation(std::span<const RawCharacterisation> population)
{
    std::vector<std::vector<double>> values;
    values.reserve(population.size());
    for (const auto& b : population)
        values.push_back(b.values);
    return compute_standardisation(values);
}

std::vector<double> apply_standardisation(std::span<const double> b, const StandardisationCoefficients& c)
{
    require_same_length(b.size(), c.mu.size(), "apply_standardisation");
    require_same_length(b.size(), c.sigma.size(), "apply_standardisation");
    std::vector<double> out(b.size());
    for (std::size_t k = 0; k < b.size(); ++k)
        out[k] = c.sigma[k] > 0.0 ? (b[k] - c.mu[k]) / c.sigma[k] : 0.0;
    return out;
}

std::size_t MiBinning::bins_for(std::size_t n) const
{
    const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    return std::clamp(root, min_bins, std::max(min_bins, max_bins));
}

std::vector<std::size_t> equal_frequency_bins(std::span<const double> values, std::size_t bins)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    // A value's bin is decided by how many values are strictly smaller, so ties
    // never straddle a bin boundary.
    std::vector<std::size_t> out(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]])
            ++j;
        const std::size_t bin = std::min(bins - 1, i * bins / n);
        for (std::size_t t = i; t < j; ++t)
            out[order[t]] = bin;
        i = j;
    }
    return out;
}

double estimate_mutual_information(std::span<const double> feature, std::span<const double> fitness,
                                   const MiBinning& binning)
{
    require_same_length(feature.size(), fitness.size(), "estimate_mutual_information");
    const std::size_t n = feature.size();
    if (n < 2)
        throw std::invalid_argument("estimate_mutual_information: need at least two samples");
    const std::size_t bins = binning.bins_for(n);
    const auto bx = equal_frequency_bins(feature, bins);
    const auto by = equal_frequency_bins(fitness, bins);

    std::vector<double> joint(bins * bins, 0.0), px(bins, 0.0), py(bins, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        joint[bx[i] * bins + by[i]] += 1.0;
        px[bx[i]] += 1.0;
        py[by[i]] += 1.0;
    }
    const double nn = static_cast<double>(n);
    double mi = 0.0;
    for (std::size_t a = 0; a < bins; ++a)
        for (std::size_t b = 0; b < bins; ++b) {
            const double c = joint[a * bins + b];
            if (c > 0.0)
                mi += (c / nn) * std::log2(c * nn / (px[a] * py[b]));
        }
    return std::max(0.0, mi);
}

FeatureWeights compute_weights(std::span<const std::vector<double>> population, std::span<const double> fitnesses,
                               double delta, const MiBinning& binning)
{
    if (population.empty())
        throw std::invalid_argument("compute_weights: empty population");
    require_same_length(population.size(), fitnesses.size(), "compute_weights");
    const std::size_t len = population.front().size();
    FeatureWeights w;
    w.delta = delta;
    w.weights.resize(len);
    w.mi.resize(len);
    std::vector<double> column(population.size());
    for (std::size_t k = 0; k < len; ++k) {
        for (std::size_t i = 0; i < population.size(); ++i) {
            require_same_length(population[i].size(), len, "compute_weights");
            column[i] = population[i][k];
        }
        w.mi[k] = population.size() >= 2 ? estimate_mutual_information(column, fitnesses, binning) : 0.0;
        w.weights[k] = delta + w.mi[k];
    }
    return w;
}

FeatureWeights compute_weights(std::span<const RawCharacterisation> population, std::span<const double> fitnesses,
                               double delta, const MiBinning& binning)
{
    std::vector<std::vector<double>> values;
    values.reserve(population.size());
    for (const auto& b : population)
        values.push_back(b.values);
    return compute_weights(values, fitnesses, delta, binning);
}

FeatureWeights uniform_weights(std::size_t length, double value)
{
    return FeatureWeights{std::vector<double>(length, value), std::vector<double>(length, 0.0), value};
}

std::vector<double> apply_weights(std::span<const double> b, const FeatureWeights& w)
{
    require_same_length(b.size(), w.weights.size(), "apply_weights");
    std::vector<double> out(b.size());
    for (std::size_t k = 0; k < b.size(); ++k)
        out[k] = b[k] * w.weights[k];
    return out;
}

double behaviour_distance(std::span<const double> a, std::span<const double> b)
{
    require_same_length(a.size(), b.size(), "behaviour_distance");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        sum += d * d;
    }
    return std::sqrt(sum);
}

} // namespace sdbc
