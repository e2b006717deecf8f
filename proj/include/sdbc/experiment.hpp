#pragma once

// Run orchestration and persistence. A run directory holds:
//   config.yaml      configuration that reproduces the run
//   generations.csv  per-generation summary (deterministic)
//   features.csv     per-generation, per-component mu, sigma, MI and weight
//   population.csv   per-individual fitness, novelty, TS and raw SDBC values
//   timing.csv       wall-clock seconds per generation
//   best_genome.txt  best individual found
//   archive.csv      final novelty archive
//   checkpoint.txt   resumable state (removed on completion)
//   manifest.txt     format version and completion status

#include "sdbc/analysis.hpp"
#include "sdbc/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sdbc {

inline constexpr std::string_view run_format = "sdbc-run 1";

std::filesystem::path run_directory(const std::filesystem::path& root, const ExperimentConfig& config,
                                    std::size_t index);

struct RunResult {
    std::filesystem::path dir;
    double best_fitness = 0.0;
    std::size_t generations = 0;
    bool resumed = false;
};

/// Executes (or resumes) one run into `dir` using `workers` evaluation threads.
RunResult execute_run(const ExperimentConfig& config, const std::filesystem::path& dir, std::size_t workers,
                      std::ostream* log = nullptr);

/// Runs i = 0..runs-1 with seed config.seed + i into run_directory(config.output, config, i).
/// Up to `parallel` threads are shared between concurrent runs and evaluations.
std::vector<RunResult> run_batch(const ExperimentConfig& config, std::size_t runs, std::size_t parallel,
                                 std::ostream* log = nullptr);

// ---- genomes and replay ----------------------------------------------------

struct GenomeRecord {
    std::string task;
    std::string layout;
    ControllerSpec spec;
    std::size_t generation = 0;
    std::uint64_t id = 0;
    double fitness = 0.0;
    std::vector<std::uint64_t> trial_seeds;
    std::vector<double> trial_fitness;
    Genome genome;
};

void write_genome(std::ostream& out, const GenomeRecord& record);
/// Throws std::runtime_error on malformed input.
GenomeRecord read_genome(std::istream& in);

struct ReplayResult {
    double fitness = 0.0;
    std::size_t steps = 0;
    TaskSpecific task_specific{};
};

/// One trial of `record` on the configured task; writes step,robot,x,y,heading,active rows
/// to `trajectory` when given. Throws std::invalid_argument on a spec mismatch.
ReplayResult replay(const ExperimentConfig& config, const GenomeRecord& record, std::uint64_t seed,
                    std::ostream* trajectory = nullptr);

// ---- analysis over run directories -----------------------------------------

struct RunData {
    std::filesystem::path dir;
    ExperimentConfig config;
    std::vector<double> best_so_far;
    MiLog mi;
    std::vector<std::string> sdbc_names;
    std::vector<std::vector<double>> sdbc;
    std::vector<double> fitness;
};

/// Throws std::runtime_error when the directory is not a completed run.
RunData load_run(const std::filesystem::path& dir, bool with_population = true);

struct AnalyzeOptions {
    SomParams som;
    std::uint64_t seed = 1;
    std::size_t max_samples_per_run = 0; // 0 keeps every evaluated individual
};

struct ComparisonRow {
    std::string a;
    std::string b;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double u = 0.0;
    double p_two_sided = 1.0;
    double p_greater = 1.0; // a > b
    bool exact = false;
};

struct TaskAnalysis {
    std::string task;
    std::vector<std::string> methods;
    std::map<std::string, std::vector<double>> best_per_run;
    std::map<std::string, std::vector<double>> mean_curve; // mean best-so-far per generation
    std::map<std::string, std::vector<MiRow>> mi;
    DensityMap density;
    std::vector<ComparisonRow> comparisons;
};

/// Groups runs by task and method and writes the analysis outputs under `out`.
/// Incomplete directories are reported to `log` and skipped. Run directories are never modified.
std::vector<TaskAnalysis> analyze_runs(const std::vector<std::filesystem::path>& dirs, const AnalyzeOptions& options,
                                       const std::filesystem::path& out, std::ostream* log = nullptr);

} // namespace sdbc
