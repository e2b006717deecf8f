#pragma once

// From per-step feature samples to the transformed behaviour characterisation:
// aggregation, population standardisation, mutual-information weighting and the
// Euclidean behaviour distance.

#include "sdbc/formalism.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sdbc {

/// Names of the 2F+1 aggregated components:
/// "<f> (M)" for each feature, "<f> (F)" for each feature, then "simulation length".
struct CharacterisationSchema {
    std::vector<std::string> names;
    std::uint64_t id = 0;
    std::size_t feature_count = 0;

    std::size_t size() const noexcept { return names.size(); }
};

std::shared_ptr<const CharacterisationSchema> characterisation_schema(const FeatureSchema& features);

/// Layout: [mean(f_1..f_F), final(f_1..f_F), steps_elapsed / max_steps].
struct RawCharacterisation {
    std::vector<double> values;
    std::shared_ptr<const CharacterisationSchema> schema;

    std::size_t size() const noexcept { return values.size(); }
};

/// Throws std::invalid_argument on empty input or bad step counts and
/// SchemaMismatchError when samples disagree on schema or length.
RawCharacterisation aggregate(std::span<const FeatureSnapshot> samples, std::size_t steps_elapsed,
                              std::size_t max_steps);

/// Streaming form of aggregate(); finish() yields the same values as
/// aggregate() over the same samples.
class FeatureAccumulator {
public:
    explicit FeatureAccumulator(std::shared_ptr<const FeatureSchema> features);

    void add(std::span<const double> values);
    std::size_t count() const noexcept { return count_; }
    RawCharacterisation finish(std::size_t steps_elapsed, std::size_t max_steps) const;

private:
    std::shared_ptr<const CharacterisationSchema> schema_;
    std::vector<double> sum_;
    std::vector<double> last_;
    std::size_t count_ = 0;
};

struct TrialAggregate {
    RawCharacterisation characterisation;
    double fitness = 0.0;
};

/// Element-wise mean characterisation and mean fitness over trials.
TrialAggregate aggregate_trials(std::span<const RawCharacterisation> per_trial, std::span<const double> per_trial_fitness);

struct StandardisationCoefficients {
    std::vector<double> mu;
    std::vector<double> sigma;
};

/// Per-component population mean and (population) standard deviation.
StandardisationCoefficients compute_standardisation(std::span<const std::vector<double>> population);
StandardisationCoefficients compute_standardisation(std::span<const RawCharacterisation> population);

/// (b_k - mu_k) / sigma_k, and 0 where sigma_k == 0.
std::vector<double> apply_standardisation(std::span<const double> b, const StandardisationCoefficients& c);

/// Bin-count policy for the histogram MI estimator: B = clamp(ceil(sqrt(n)), min_bins, max_bins).
struct MiBinning {
    std::size_t min_bins = 4;
    std::size_t max_bins = 16;

    std::size_t bins_for(std::size_t n) const;
};

/// Equal-frequency bin index per value. Tied values always share a bin.
std::vector<std::size_t> equal_frequency_bins(std::span<const double> values, std::size_t bins);

/// Plug-in mutual information (bits) over equal-frequency histograms, clamped at 0.
double estimate_mutual_information(std::span<const double> feature, std::span<const double> fitness,
                                   const MiBinning& binning = {});

struct FeatureWeights {
    std::vector<double> weights;
    std::vector<double> mi;
    double delta = 0.25;
};

/// weights[k] = delta + MI(component k over the population, fitness).
FeatureWeights compute_weights(std::span<const std::vector<double>> population, std::span<const double> fitnesses,
                               double delta = 0.25, const MiBinning& binning = {});
FeatureWeights compute_weights(std::span<const RawCharacterisation> population, std::span<const double> fitnesses,
                               double delta = 0.25, const MiBinning& binning = {});

/// Uniform weights (all `value`), used when weighting is disabled.
FeatureWeights uniform_weights(std::size_t length, double value = 1.0);

std::vector<double> apply_weights(std::span<const double> b, const FeatureWeights& w);

double behaviour_distance(std::span<const double> a, std::span<const double> b);

} // namespace sdbc
