// sdbc: run, replay and analyse novelty-search experiments.

#include "sdbc/errors.hpp"
#include "sdbc/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace sdbc;

namespace {

ExperimentConfig base_config(const std::string& path)
{
    ExperimentConfig c = path.empty() ? ExperimentConfig{} : load_config(path);
    apply_env_overrides(c);
    return c;
}

// Run directories below each argument (an argument may itself be a run directory).
std::vector<fs::path> collect_runs(const std::vector<std::string>& roots)
{
    std::vector<fs::path> out;
    for (const auto& r : roots) {
        const fs::path root(r);
        if (fs::exists(root / "manifest.txt")) {
            out.push_back(root);
            continue;
        }
        if (!fs::is_directory(root)) {
            std::cerr << "skipping " << r << ": not a directory\n";
            continue;
        }
        std::vector<fs::path> found;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file() && e.path().filename() == "manifest.txt")
                found.push_back(e.path().parent_path());
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Novelty search with systematically derived behaviour characterisations"};
    app.require_subcommand(0, 1);
    bool print_defaults_flag = false;
    app.add_flag("--print-defaults", print_defaults_flag, "Print the annotated default configuration");

    std::string config_path;
    std::size_t runs = 1;
    std::size_t parallel = 0;
    std::optional<std::uint64_t> seed;
    std::string out;

    auto* run = app.add_subcommand("run", "Execute evolutionary runs");
    run->add_option("--config", config_path, "YAML configuration file")->check(CLI::ExistingFile);
    run->add_option("--runs", runs, "Number of independent runs (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
    run->add_option("--parallel", parallel, "Worker threads (0 = all cores)");
    run->add_option("--seed", seed, "Master seed (overrides the configuration)");
    run->add_option("--out", out, "Output root directory (overrides the configuration)");

    std::string genome_path;
    std::string trajectory_path;
    auto* rep = app.add_subcommand("replay", "Replay a genome for one trial");
    rep->add_option("--genome", genome_path, "Genome file (best_genome.txt)")->required()->check(CLI::ExistingFile);
    rep->add_option("--config", config_path, "Configuration (defaults to config.yaml next to the genome)");
    rep->add_option("--seed", seed, "Trial seed (defaults to the genome's first trial seed)");
    rep->add_option("--out", trajectory_path, "Trajectory CSV output");

    std::vector<std::string> run_dirs;
    AnalyzeOptions analyze_opts;
    std::string analysis_out = "analysis";
    auto* ana = app.add_subcommand("analyze", "Analyse completed runs");
    ana->add_option("runs", run_dirs, "Run directories or roots containing them")->required();
    ana->add_option("--out", analysis_out, "Output directory");
    ana->add_option("--seed", analyze_opts.seed, "SOM training seed");
    ana->add_option("--som-width", analyze_opts.som.width, "SOM grid width")->check(CLI::PositiveNumber);
    ana->add_option("--som-height", analyze_opts.som.height, "SOM grid height")->check(CLI::PositiveNumber);
    ana->add_option("--som-epochs", analyze_opts.som.epochs, "SOM training epochs")->check(CLI::PositiveNumber);
    ana->add_option("--max-samples", analyze_opts.max_samples_per_run, "SOM samples per run (0 = all)");

    auto* defaults = app.add_subcommand("print-defaults", "Print the annotated default configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_defaults_flag || *defaults) {
            std::cout << emit_config(ExperimentConfig{}, true);
            return 0;
        }
        if (*run) {
            ExperimentConfig c = base_config(config_path);
            if (seed)
                c.evolution.seed = *seed;
            if (!out.empty())
                c.output = out;
            validate(c);
            const auto results = run_batch(c, runs, parallel, &std::cerr);
            for (const auto& r : results)
                std::cout << fmt::format("{}\t{}\t{}\n", r.dir.string(), r.generations, r.best_fitness);
            return 0;
        }
        if (*rep) {
            std::ifstream in(genome_path);
            const GenomeRecord g = read_genome(in);
            if (config_path.empty()) {
                const fs::path sibling = fs::path(genome_path).parent_path() / "config.yaml";
                if (fs::exists(sibling))
                    config_path = sibling.string();
            }
            ExperimentConfig c = base_config(config_path);
            if (config_path.empty())
                c.task = g.task;
            validate(c);
            const std::uint64_t s = seed ? *seed : (g.trial_seeds.empty() ? 0 : g.trial_seeds.front());
            std::optional<std::ofstream> traj;
            if (!trajectory_path.empty()) {
                traj.emplace(trajectory_path, std::ios::binary | std::ios::trunc);
                if (!*traj)
                    throw std::runtime_error("cannot write " + trajectory_path);
            }
            const ReplayResult r = replay(c, g, s, traj ? &*traj : nullptr);
            std::cout << fmt::format("seed {}\nsteps {}\nfitness {}\n", s, r.steps, r.fitness);
            return 0;
        }
        if (*ana) {
            const auto dirs = collect_runs(run_dirs);
            const auto analyses = analyze_runs(dirs, analyze_opts, analysis_out, &std::cerr);
            for (const auto& a : analyses)
                for (const auto& m : a.methods)
                    std::cout << fmt::format("{}\t{}\t{} runs\n", a.task, m, a.best_per_run.at(m).size());
            return 0;
        }
        std::cout << app.help();
        return 0;
    }
    catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
