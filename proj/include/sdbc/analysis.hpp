#pragma once

// Post-hoc analysis of completed runs: Kohonen maps of behaviour space,
// per-method exploration density, MI relevance tables and Mann-Whitney tests.

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sdbc {

// ---- self-organising map ---------------------------------------------------

struct SomParams {
    std::size_t width = 8;
    std::size_t height = 8;
    std::size_t epochs = 20;
    double learning_rate = 0.5;
    double final_learning_rate = 0.01;
    double radius = 0.0; // 0 selects max(width, height) / 2
    double final_radius = 0.5;
};

/// Prototypes stored row-major: cell = y * width + x.
struct SomGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t dim = 0;
    std::vector<double> prototypes;
    SomParams params;

    std::size_t cells() const noexcept { return width * height; }
    std::span<const double> prototype(std::size_t cell) const;
};

/// Online SOM. Prototypes start at randomly drawn samples; each epoch visits the
/// samples in a shuffled order. Learning rate and Gaussian neighbourhood radius
/// decay geometrically from their initial to their final values.
/// `epoch_errors`, if given, receives the mean quantisation error after each epoch.
SomGrid train_som(std::span<const std::vector<double>> samples, const SomParams& params, std::mt19937_64& rng,
                  std::vector<double>* epoch_errors = nullptr);

/// Nearest prototype (L2); ties go to the lowest cell index.
std::size_t best_matching_unit(const SomGrid& map, std::span<const double> sample);

double quantisation_error(const SomGrid& map, std::span<const std::vector<double>> samples);

// ---- exploration density ---------------------------------------------------

struct MethodSamples {
    std::string method;
    std::vector<std::vector<double>> samples;
    std::vector<double> fitness; // one per sample, may be empty
};

struct DensityMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::string> methods;
    std::vector<std::vector<std::size_t>> counts;      // [method][cell]
    std::vector<std::vector<double>> mean_fitness;     // [method][cell], NaN where empty
    std::size_t best_cell = 0;                         // highest mean fitness over all methods
    bool has_best_cell = false;
};

DensityMap exploration_density(const SomGrid& map, std::span<const MethodSamples> methods);

/// Non-empty cells.
std::size_t occupied_cells(std::span<const std::size_t> counts);

/// Fewest cells that together hold at least `fraction` of the samples.
std::size_t cells_holding(std::span<const std::size_t> counts, double fraction);

/// Circle-size heat map of one method's counts.
void write_density_svg(std::ostream& out, const DensityMap& map, std::size_t method, double cell_size = 40.0);

// ---- MI relevance ----------------------------------------------------------

/// Per-generation MI of one run: mi[g][k] for component names[k].
struct MiLog {
    std::vector<std::string> names;
    std::vector<std::vector<double>> mi;
};

struct MiRow {
    std::string feature;
    double mean = 0.0;
    double sd = 0.0; // population sd over all (run, generation) values
    std::size_t samples = 0;
};

/// Rows sorted by descending mean MI; ties keep component order.
/// Throws std::invalid_argument when no run carries MI values or names disagree.
std::vector<MiRow> mi_relevance_table(std::span<const MiLog> runs);

// ---- Mann-Whitney U --------------------------------------------------------

enum class Alternative { two_sided, greater, less };

struct MannWhitneyResult {
    double u = 0.0; // U of the first sample: R_a - n_a (n_a + 1) / 2
    double p = 1.0;
    bool exact = false;
};

/// Exact permutation distribution of U (midranks) when max(|a|, |b|) <= exact_limit,
/// otherwise the tie-corrected normal approximation with continuity correction.
/// `greater` tests whether a tends to exceed b.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 Alternative alternative = Alternative::two_sided, std::size_t exact_limit = 8);

} // namespace sdbc
