#include "sdbc/analysis.hpp"
#include "sdbc/characterisation.hpp"
#include "sdbc/config.hpp"
#include "sdbc/errors.hpp"
#include "sdbc/evolution.hpp"
#include "sdbc/experiment.hpp"
#include "sdbc/novelty.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace sdbc;

namespace {

ExperimentConfig config_from(const std::string& yaml_text)
{
    return yaml_text.empty() ? ExperimentConfig{} : parse_config(yaml_text);
}

Alternative alternative_from(const std::string& s)
{
    if (s == "two-sided")
        return Alternative::two_sided;
    if (s == "greater")
        return Alternative::greater;
    if (s == "less")
        return Alternative::less;
    throw std::invalid_argument("alternative must be two-sided, greater or less");
}

py::dict weights_dict(const FeatureWeights& w)
{
    py::dict d;
    d["weights"] = w.weights;
    d["mi"] = w.mi;
    d["delta"] = w.delta;
    return d;
}

std::vector<Objectives> objectives_from(const std::vector<std::pair<double, double>>& points)
{
    std::vector<Objectives> out;
    out.reserve(points.size());
    for (const auto& [f, n] : points)
        out.push_back({f, n});
    return out;
}

} // namespace

PYBIND11_MODULE(_sdbc, m)
{
    m.doc() = "Systematically derived behaviour characterisations for evolutionary swarm robotics.";

    py::register_exception<SchemaMismatchError>(m, "SchemaMismatchError", PyExc_ValueError);

    m.def("gate_fitness", &gate_fitness, py::arg("escaped"), py::arg("steps"), py::arg("max_steps"), py::arg("robots"));
    m.def("sharing_fitness", &sharing_fitness, py::arg("survivors"), py::arg("mean_energy"), py::arg("max_energy"),
          py::arg("robots"));
    m.def("pursuit_fitness", &pursuit_fitness, py::arg("captured"), py::arg("steps"), py::arg("max_steps"),
          py::arg("initial_distance"), py::arg("final_distance"), py::arg("arena_diagonal"));

    m.def("task_names", &task_names);
    m.def(
        "characterisation_names",
        [](const std::string& config_yaml) {
            const auto task = make_task(config_from(config_yaml));
            return characterisation_schema(feature_schema(task->layout()))->names;
        },
        py::arg("config_yaml") = "", "Names of the 2F+1 components for the configured task.");

    m.def(
        "standardise",
        [](const std::vector<std::vector<double>>& population) {
            const auto c = compute_standardisation(population);
            std::vector<std::vector<double>> out;
            for (const auto& b : population)
                out.push_back(apply_standardisation(b, c));
            return py::make_tuple(out, c.mu, c.sigma);
        },
        py::arg("population"), "Returns (standardised rows, mu, sigma).");
    m.def(
        "mutual_information",
        [](const std::vector<double>& feature, const std::vector<double>& fitness) {
            return estimate_mutual_information(feature, fitness);
        },
        py::arg("feature"), py::arg("fitness"));
    m.def(
        "compute_weights",
        [](const std::vector<std::vector<double>>& population, const std::vector<double>& fitness, double delta) {
            return weights_dict(compute_weights(population, fitness, delta));
        },
        py::arg("population"), py::arg("fitness"), py::arg("delta") = 0.25);
    m.def(
        "behaviour_distance",
        [](const std::vector<double>& a, const std::vector<double>& b) { return behaviour_distance(a, b); },
        py::arg("a"), py::arg("b"));
    m.def(
        "novelty",
        [](const std::vector<std::vector<double>>& population, const std::vector<std::vector<double>>& archive,
           std::size_t k) {
            std::vector<ScoredIndividual> inds;
            for (std::size_t i = 0; i < population.size(); ++i)
                inds.push_back({i, 0.0, population[i], 0.0});
            score_population(inds, archive, k);
            std::vector<double> out;
            for (const auto& s : inds)
                out.push_back(s.novelty);
            return out;
        },
        py::arg("population"), py::arg("archive") = std::vector<std::vector<double>>{}, py::arg("k") = 15,
        "Mean distance to the k nearest neighbours among the other individuals and the archive.");
    m.def(
        "non_dominated_sort",
        [](const std::vector<std::pair<double, double>>& points) { return non_dominated_sort(objectives_from(points)); },
        py::arg("points"), "Fronts of (fitness, novelty) points, both maximised.");
    m.def(
        "crowding_distance",
        [](const std::vector<std::pair<double, double>>& points) { return crowding_distance(objectives_from(points)); },
        py::arg("points"));
    m.def(
        "mann_whitney_u",
        [](const std::vector<double>& a, const std::vector<double>& b, const std::string& alternative) {
            const auto r = mann_whitney_u(a, b, alternative_from(alternative));
            py::dict d;
            d["u"] = r.u;
            d["p"] = r.p;
            d["exact"] = r.exact;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("alternative") = "two-sided");

    m.def(
        "run_trial",
        [](const std::vector<double>& genome, std::uint64_t seed, const std::string& config_yaml) {
            const auto config = config_from(config_yaml);
            const auto task = make_task(config);
            const ControllerSpec spec{task->sensor_count(), config.evolution.ga.hidden, task->effector_count()};
            TrialRecord rec;
            {
                py::gil_scoped_release release;
                Controller controller(Genome{genome}, spec);
                rec = run_trial(*task, controller, seed);
            }
            py::dict d;
            d["fitness"] = rec.fitness;
            d["steps"] = rec.steps;
            d["sdbc"] = rec.sdbc.values;
            d["task_specific"] = std::vector<double>(rec.task_specific.begin(), rec.task_specific.end());
            return d;
        },
        py::arg("genome"), py::arg("seed"), py::arg("config_yaml") = "",
        "One trial of a controller genome on the configured task.");
    m.def(
        "genome_length",
        [](const std::string& config_yaml) {
            const auto config = config_from(config_yaml);
            const auto task = make_task(config);
            return ControllerSpec{task->sensor_count(), config.evolution.ga.hidden, task->effector_count()}
                .genome_length();
        },
        py::arg("config_yaml") = "");

    m.def(
        "run",
        [](const std::string& config_yaml, const std::filesystem::path& dir, std::size_t workers) {
            const auto config = config_from(config_yaml);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = execute_run(config, dir, workers);
            }
            py::dict d;
            d["dir"] = r.dir;
            d["best_fitness"] = r.best_fitness;
            d["generations"] = r.generations;
            d["resumed"] = r.resumed;
            return d;
        },
        py::arg("config_yaml"), py::arg("dir"), py::arg("workers") = 1,
        "Executes or resumes one evolutionary run into `dir`.");
    m.def(
        "analyze",
        [](const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out) {
            std::vector<TaskAnalysis> result;
            std::ostringstream log;
            {
                py::gil_scoped_release release;
                result = analyze_runs(dirs, AnalyzeOptions{}, out, &log);
            }
            py::list tasks;
            for (const auto& a : result) {
                py::dict d;
                d["task"] = a.task;
                d["methods"] = a.methods;
                d["best_per_run"] = a.best_per_run;
                py::dict mi;
                for (const auto& [method, rows] : a.mi) {
                    py::list l;
                    for (const auto& r : rows)
                        l.append(py::make_tuple(r.feature, r.mean, r.sd));
                    mi[py::str(method)] = l;
                }
                d["mi"] = mi;
                py::dict occupied;
                for (std::size_t i = 0; i < a.density.methods.size(); ++i)
                    occupied[py::str(a.density.methods[i])] = occupied_cells(a.density.counts[i]);
                d["occupied_cells"] = occupied;
                tasks.append(d);
            }
            return py::make_tuple(tasks, log.str());
        },
        py::arg("dirs"), py::arg("out"), "Returns (per-task summaries, log text).");
}
