#include "sdbc/experiment.hpp"

#include "sdbc/csv.hpp"
#include "sdbc/errors.hpp"
#include "sdbc/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sdbc {

namespace fs = std::filesystem;

namespace {

std::mutex log_mutex;

void log_line(std::ostream* log, const std::string& line)
{
    if (!log)
        return;
    std::lock_guard lock(log_mutex);
    *log << line << '\n' << std::flush;
}

std::string method_tag(std::string_view method)
{
    std::string s(method);
    if (!s.empty() && s.back() == '+')
        s.replace(s.size() - 1, 1, "plus");
    return s;
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_atomic(const fs::path& p, const std::string& text)
{
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, p);
}

bool run_complete(const fs::path& dir)
{
    std::ifstream in(dir / "manifest.txt");
    std::string line;
    while (std::getline(in, line))
        if (line == "status complete")
            return true;
    return false;
}

CsvTable read_csv_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + p.string());
    return read_csv(in);
}

// Keeps the header and the rows whose generation (first column) is below `generation`.
void truncate_log(const fs::path& p, std::size_t generation)
{
    if (!fs::exists(p))
        return;
    const CsvTable table = read_csv_file(p);
    std::ostringstream out;
    CsvWriter w(out);
    for (std::size_t i = 0; i < table.size(); ++i)
        if (i == 0 || std::stoull(table[i][0]) < generation)
            w.row(table[i]);
    write_text_atomic(p, out.str());
}

double parse_real(const std::string& s)
{
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
        throw std::runtime_error("bad number '" + s + "'");
    return v;
}

std::vector<std::string> numbers(std::span<const double> v)
{
    std::vector<std::string> out;
    out.reserve(v.size());
    for (double x : v)
        out.push_back(format_double(x));
    return out;
}

} // namespace

fs::path run_directory(const fs::path& root, const ExperimentConfig& config, std::size_t index)
{
    return root / config.task / method_tag(to_string(config.evolution.method)) / fmt::format("run_{:03}", index);
}

RunResult execute_run(const ExperimentConfig& config, const fs::path& dir, std::size_t workers, std::ostream* log)
{
    validate(config);
    fs::create_directories(dir);
    RunResult result;
    result.dir = dir;
    const std::string config_text = emit_config(config);
    const fs::path config_path = dir / "config.yaml";
    const fs::path checkpoint_path = dir / "checkpoint.txt";

    if (run_complete(dir)) {
        if (read_text(config_path) != config_text)
            throw std::runtime_error(dir.string() + ": completed run has a different configuration");
        const RunData data = load_run(dir, false);
        result.generations = data.best_so_far.size();
        result.best_fitness = data.best_so_far.empty() ? 0.0 : data.best_so_far.back();
        log_line(log, dir.string() + ": already complete");
        return result;
    }

    const auto task = make_task(config);
    EvolutionConfig ecfg = config.evolution;
    ecfg.workers = std::max<std::size_t>(1, workers);
    Evolution evo(*task, ecfg);

    const fs::path gen_path = dir / "generations.csv";
    const fs::path feat_path = dir / "features.csv";
    const fs::path pop_path = dir / "population.csv";
    const fs::path time_path = dir / "timing.csv";

    std::vector<double> best_so_far;
    if (fs::exists(checkpoint_path)) {
        if (read_text(config_path) != config_text)
            throw std::runtime_error(dir.string() + ": checkpoint belongs to a different configuration");
        std::ifstream in(checkpoint_path);
        evo.load(in);
        result.resumed = true;
        for (const auto& p : {gen_path, feat_path, pop_path, time_path})
            truncate_log(p, evo.generation());
        const CsvTable rows = read_csv_file(gen_path);
        for (std::size_t i = 1; i < rows.size(); ++i)
            best_so_far.push_back(parse_real(rows[i][3]));
        log_line(log, fmt::format("{}: resuming at generation {}", dir.string(), evo.generation()));
    }
    else {
        write_text_atomic(config_path, config_text);
        std::ofstream(dir / "manifest.txt", std::ios::binary | std::ios::trunc)
            << run_format << "\nstatus running\n";
        std::ofstream gen(gen_path, std::ios::binary | std::ios::trunc);
        CsvWriter(gen).row({"generation", "best_fitness", "mean_fitness", "best_so_far", "best_id", "archive_size"});
        std::ofstream feat(feat_path, std::ios::binary | std::ios::trunc);
        CsvWriter(feat).row({"generation", "component", "mu", "sigma", "mi", "weight"});
        std::ofstream tim(time_path, std::ios::binary | std::ios::trunc);
        CsvWriter(tim).row({"generation", "seconds"});
        std::ofstream pop(pop_path, std::ios::binary | std::ios::trunc);
        if (config.log.population) {
            const auto schema = characterisation_schema(feature_schema(task->layout()));
            std::vector<std::string> header{"generation", "id", "fitness", "novelty", "ts_1", "ts_2", "ts_3", "ts_4"};
            header.insert(header.end(), schema->names.begin(), schema->names.end());
            if (config.log.transformed)
                for (const auto& n : schema->names)
                    header.push_back("z:" + n);
            CsvWriter(pop).row(header);
        }
        evo.initialise();
    }

    std::ofstream gen(gen_path, std::ios::binary | std::ios::app);
    std::ofstream feat(feat_path, std::ios::binary | std::ios::app);
    std::ofstream pop(pop_path, std::ios::binary | std::ios::app);
    std::ofstream tim(time_path, std::ios::binary | std::ios::app);
    CsvWriter gen_w(gen), feat_w(feat), pop_w(pop), tim_w(tim);
    const std::size_t total = config.evolution.ga.generations;
    const auto names = characterisation_schema(feature_schema(task->layout()))->names;
    const bool has_novelty = config.evolution.method != Method::fit;
    const bool has_mi = config.evolution.method == Method::ns_sd || config.evolution.method == Method::ns_sd_plus;

    while (evo.generation() < total) {
        const std::size_t g = evo.generation();
        const bool last = g + 1 == total;
        const std::vector<Individual> scored_population(evo.population().begin(), evo.population().end());
        const auto t0 = std::chrono::steady_clock::now();
        const GenerationReport report = evo.run_generation(last);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best_so_far.push_back(report.best_so_far);

        gen_w.row({std::to_string(g), format_double(report.best_fitness), format_double(report.mean_fitness),
                   format_double(report.best_so_far), std::to_string(report.best_id),
                   std::to_string(report.archive_size)});
        for (std::size_t k = 0; k < names.size(); ++k)
            feat_w.row({std::to_string(g), names[k], format_double(report.coefficients.mu[k]),
                        format_double(report.coefficients.sigma[k]), has_mi ? format_double(report.mi[k]) : "",
                        format_double(report.weights.weights[k])});
        if (config.log.population) {
            for (std::size_t i = 0; i < scored_population.size(); ++i) {
                const auto& ind = scored_population[i];
                std::vector<std::string> row{std::to_string(g), std::to_string(ind.id), format_double(ind.eval.fitness),
                                             has_novelty ? format_double(report.scored[i].novelty) : ""};
                for (double v : ind.eval.task_specific)
                    row.push_back(format_double(v));
                for (double v : ind.eval.sdbc.values)
                    row.push_back(format_double(v));
                if (config.log.transformed)
                    for (const auto& s :
                         numbers(apply_weights(apply_standardisation(ind.eval.sdbc.values, report.coefficients), report.weights)))
                        row.push_back(s);
                pop_w.row(row);
            }
        }
        tim_w.row({std::to_string(g), fmt::format("{:.6f}", seconds)});
        gen.flush();
        feat.flush();
        pop.flush();
        tim.flush();
        if (!gen || !feat || !pop || !tim)
            throw std::runtime_error(dir.string() + ": failed writing logs");
        log_line(log, fmt::format("{} gen {:>4}  best {:.4f}  mean {:.4f}  best-so-far {:.4f}  ({:.1f}s)",
                                  dir.string(), g, report.best_fitness, report.mean_fitness, report.best_so_far,
                                  seconds));
        if (last)
            break;
        if (evo.generation() % config.log.checkpoint_every == 0) {
            std::ostringstream ss;
            evo.save(ss);
            write_text_atomic(checkpoint_path, ss.str());
        }
    }

    std::size_t best_generation = 0;
    for (std::size_t g = 0; g < best_so_far.size(); ++g)
        if (best_so_far[g] == best_so_far.back()) {
            best_generation = g;
            break;
        }
    const Individual& best = evo.best();
    GenomeRecord rec{config.task,
                     std::string(to_string(config.task == "gate_escape"        ? config.gate_escape.layout
                                           : config.task == "resource_sharing" ? config.resource_sharing.layout
                                                                               : config.predator_prey.layout)),
                     evo.spec(),
                     best_generation,
                     best.id,
                     best.eval.fitness,
                     best.eval.trial_seeds,
                     best.eval.trial_fitness,
                     best.genome};
    std::ostringstream genome_text;
    write_genome(genome_text, rec);
    write_text_atomic(dir / "best_genome.txt", genome_text.str());

    std::ostringstream archive_text;
    CsvWriter aw(archive_text);
    aw.row({"id", "generation", "values"});
    for (const auto& e : evo.archive().entries()) {
        std::vector<std::string> row{std::to_string(e.id), std::to_string(e.generation)};
        for (const auto& s : numbers(e.raw))
            row.push_back(s);
        aw.row(row);
    }
    write_text_atomic(dir / "archive.csv", archive_text.str());
    write_text_atomic(dir / "manifest.txt",
                      fmt::format("{}\nstatus complete\ngenerations {}\n", run_format, best_so_far.size()));
    fs::remove(checkpoint_path);

    result.generations = best_so_far.size();
    result.best_fitness = best_so_far.empty() ? 0.0 : best_so_far.back();
    return result;
}

std::vector<RunResult> run_batch(const ExperimentConfig& config, std::size_t runs, std::size_t parallel,
                                 std::ostream* log)
{
    if (runs == 0)
        throw std::invalid_argument("run_batch: runs must be >= 1");
    if (parallel == 0)
        parallel = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t concurrent = std::min(parallel, runs);
    const std::size_t workers = std::max<std::size_t>(1, parallel / concurrent);
    std::vector<RunResult> results(runs);
    parallel_for(runs, concurrent, [&](std::size_t i) {
        ExperimentConfig c = config;
        c.evolution.seed = config.evolution.seed + i;
        results[i] = execute_run(c, run_directory(config.output, config, i), workers, log);
    });
    return results;
}

// ---- genomes and replay ----------------------------------------------------

void write_genome(std::ostream& out, const GenomeRecord& r)
{
    out << "sdbc-genome 1\n";
    out << "task " << r.task << '\n';
    out << "layout " << r.layout << '\n';
    out << "inputs " << r.spec.inputs << '\n';
    out << "hidden " << r.spec.hidden << '\n';
    out << "outputs " << r.spec.outputs << '\n';
    out << "generation " << r.generation << '\n';
    out << "id " << r.id << '\n';
    out << "fitness " << format_double(r.fitness) << '\n';
    out << "trial_seeds";
    for (auto s : r.trial_seeds)
        out << ' ' << s;
    out << "\ntrial_fitness";
    for (double f : r.trial_fitness)
        out << ' ' << format_double(f);
    out << "\nweights " << r.genome.size() << '\n';
    for (std::size_t i = 0; i < r.genome.size(); ++i)
        out << format_double(r.genome.weights[i]) << (i + 1 == r.genome.size() ? '\n' : ' ');
}

GenomeRecord read_genome(std::istream& in)
{
    auto fail = [](const std::string& what) -> std::runtime_error {
        return std::runtime_error("genome file: " + what);
    };
    GenomeRecord r;
    std::string line;
    if (!std::getline(in, line) || line != "sdbc-genome 1")
        throw fail("missing 'sdbc-genome 1' header");
    auto field = [&](const std::string& key) -> std::istringstream {
        if (!std::getline(in, line))
            throw fail("unexpected end of file before '" + key + "'");
        std::istringstream ss(line);
        std::string got;
        ss >> got;
        if (got != key)
            throw fail("expected '" + key + "', got '" + got + "'");
        return ss;
    };
    auto word = [&](std::istringstream ss, const std::string& key) {
        std::string v;
        if (!(ss >> v))
            throw fail("missing value for '" + key + "'");
        return v;
    };
    auto count = [&](const std::string& key) -> std::uint64_t {
        const std::string v = word(field(key), key);
        try {
            std::size_t used = 0;
            const auto n = std::stoull(v, &used);
            if (used != v.size())
                throw std::invalid_argument(v);
            return n;
        }
        catch (const std::exception&) {
            throw fail("bad integer for '" + key + "': " + v);
        }
    };
    auto real = [&](const std::string& token, const std::string& key) {
        try {
            return parse_real(token);
        }
        catch (const std::exception&) {
            throw fail("bad number for '" + key + "': " + token);
        }
    };
    r.task = word(field("task"), "task");
    r.layout = word(field("layout"), "layout");
    r.spec.inputs = count("inputs");
    r.spec.hidden = count("hidden");
    r.spec.outputs = count("outputs");
    r.generation = count("generation");
    r.id = count("id");
    r.fitness = real(word(field("fitness"), "fitness"), "fitness");
    {
        auto ss = field("trial_seeds");
        for (std::string t; ss >> t;) {
            try {
                r.trial_seeds.push_back(std::stoull(t));
            }
            catch (const std::exception&) {
                throw fail("bad trial seed '" + t + "'");
            }
        }
    }
    {
        auto ss = field("trial_fitness");
        for (std::string t; ss >> t;)
            r.trial_fitness.push_back(real(t, "trial_fitness"));
    }
    const std::uint64_t n = count("weights");
    if (n != r.spec.genome_length())
        throw fail(fmt::format("declares {} weights but the controller needs {}", n, r.spec.genome_length()));
    r.genome.weights.reserve(n);
    for (std::string t; r.genome.weights.size() < n && in >> t;)
        r.genome.weights.push_back(real(t, "weights"));
    if (r.genome.weights.size() != n)
        throw fail(fmt::format("expected {} weights, found {}", n, r.genome.weights.size()));
    std::string extra;
    if (in >> extra)
        throw fail("trailing content '" + extra + "'");
    return r;
}

namespace {

class CsvTrajectory final : public TrajectorySink {
public:
    explicit CsvTrajectory(std::ostream& out) : w_(out) { w_.row({"step", "robot", "x", "y", "heading", "active"}); }

    void record(std::size_t step, std::span<const sim::RobotBody> bodies) override
    {
        for (std::size_t i = 0; i < bodies.size(); ++i)
            w_.row({std::to_string(step), std::to_string(i), format_double(bodies[i].position.x),
                    format_double(bodies[i].position.y), format_double(bodies[i].heading),
                    bodies[i].active ? "1" : "0"});
    }

private:
    CsvWriter w_;
};

} // namespace

ReplayResult replay(const ExperimentConfig& config, const GenomeRecord& record, std::uint64_t seed,
                    std::ostream* trajectory)
{
    const auto task = make_task(config);
    if (record.task != config.task)
        throw std::invalid_argument("replay: genome evolved for '" + record.task + "', configuration is '" +
                                    config.task + "'");
    if (record.spec.inputs != task->sensor_count() || record.spec.outputs != task->effector_count())
        throw std::invalid_argument(fmt::format("replay: genome has {} inputs / {} outputs, task needs {} / {}",
                                                record.spec.inputs, record.spec.outputs, task->sensor_count(),
                                                task->effector_count()));
    if (record.genome.size() != record.spec.genome_length())
        throw std::invalid_argument("replay: genome length does not match its controller spec");
    Controller controller(record.genome, record.spec);
    std::optional<CsvTrajectory> sink;
    if (trajectory)
        sink.emplace(*trajectory);
    const TrialRecord t = run_trial(*task, controller, seed, sink ? &*sink : nullptr);
    return {t.fitness, t.steps, t.task_specific};
}

// ---- analysis --------------------------------------------------------------

RunData load_run(const fs::path& dir, bool with_population)
{
    if (!run_complete(dir))
        throw std::runtime_error(dir.string() + ": not a completed run");
    RunData d;
    d.dir = dir;
    d.config = load_config(dir / "config.yaml");

    const CsvTable gens = read_csv_file(dir / "generations.csv");
    for (std::size_t i = 1; i < gens.size(); ++i)
        d.best_so_far.push_back(parse_real(gens.at(i).at(3)));
    if (d.best_so_far.empty())
        throw std::runtime_error(dir.string() + ": empty generation log");

    const CsvTable feats = read_csv_file(dir / "features.csv");
    std::size_t current = static_cast<std::size_t>(-1);
    for (std::size_t i = 1; i < feats.size(); ++i) {
        const auto& row = feats[i];
        if (row.size() < 6)
            throw std::runtime_error(dir.string() + ": malformed features.csv");
        const std::size_t g = std::stoull(row[0]);
        if (g == 0)
            d.mi.names.push_back(row[1]);
        if (row[4].empty())
            continue;
        if (g != current) {
            d.mi.mi.emplace_back();
            current = g;
        }
        d.mi.mi.back().push_back(parse_real(row[4]));
    }

    if (with_population && d.config.log.population) {
        const CsvTable pop = read_csv_file(dir / "population.csv");
        if (pop.empty())
            throw std::runtime_error(dir.string() + ": empty population.csv");
        const auto& header = pop[0];
        constexpr std::size_t first = 8;
        std::size_t last = first;
        while (last < header.size() && header[last].rfind("z:", 0) != 0)
            ++last;
        d.sdbc_names.assign(header.begin() + first, header.begin() + static_cast<std::ptrdiff_t>(last));
        for (std::size_t i = 1; i < pop.size(); ++i) {
            const auto& row = pop[i];
            d.fitness.push_back(parse_real(row.at(2)));
            std::vector<double> v;
            v.reserve(last - first);
            for (std::size_t k = first; k < last; ++k)
                v.push_back(parse_real(row.at(k)));
            d.sdbc.push_back(std::move(v));
        }
    }
    return d;
}

namespace {

std::vector<std::string> ordered_methods(const std::map<std::string, std::vector<const RunData*>>& by_method)
{
    std::vector<std::string> out;
    for (Method m : {Method::fit, Method::ns_ts, Method::ns_sd, Method::ns_sd_plus})
        if (by_method.count(std::string(to_string(m))))
            out.emplace_back(to_string(m));
    return out;
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + p.string());
    out << text;
}

} // namespace

std::vector<TaskAnalysis> analyze_runs(const std::vector<fs::path>& dirs, const AnalyzeOptions& options,
                                       const fs::path& out, std::ostream* log)
{
    std::vector<RunData> runs;
    for (const auto& d : dirs) {
        try {
            runs.push_back(load_run(d));
        }
        catch (const std::exception& e) {
            log_line(log, std::string("skipping ") + d.string() + ": " + e.what());
        }
    }
    if (runs.empty())
        throw std::runtime_error("analyze: no completed runs");

    std::map<std::string, std::map<std::string, std::vector<const RunData*>>> grouped;
    for (const auto& r : runs)
        grouped[r.config.task][std::string(to_string(r.config.evolution.method))].push_back(&r);

    std::vector<TaskAnalysis> analyses;
    for (const auto& [task, by_method] : grouped) {
        TaskAnalysis a;
        a.task = task;
        a.methods = ordered_methods(by_method);
        const fs::path dir = out / task;
        fs::create_directories(dir);

        std::ostringstream curves, best, mw;
        CsvWriter cw(curves), bw(best), mww(mw);
        cw.row({"method", "generation", "mean_best_so_far", "runs"});
        bw.row({"method", "run", "directory", "best_fitness"});
        for (const auto& m : a.methods) {
            const auto& rs = by_method.at(m);
            std::size_t gens = rs.front()->best_so_far.size();
            for (const auto* r : rs)
                gens = std::min(gens, r->best_so_far.size());
            std::vector<double> curve(gens, 0.0);
            for (std::size_t i = 0; i < rs.size(); ++i) {
                for (std::size_t g = 0; g < gens; ++g)
                    curve[g] += rs[i]->best_so_far[g] / static_cast<double>(rs.size());
                a.best_per_run[m].push_back(rs[i]->best_so_far.back());
                bw.row({m, std::to_string(i), rs[i]->dir.string(), format_double(rs[i]->best_so_far.back())});
            }
            for (std::size_t g = 0; g < gens; ++g)
                cw.row({m, std::to_string(g), format_double(curve[g]), std::to_string(rs.size())});
            a.mean_curve[m] = std::move(curve);

            std::vector<MiLog> logs;
            for (const auto* r : rs)
                if (!r->mi.mi.empty())
                    logs.push_back(r->mi);
            if (!logs.empty()) {
                a.mi[m] = mi_relevance_table(logs);
                std::ostringstream t;
                CsvWriter tw(t);
                tw.row({"feature", "mean_mi", "sd_mi", "samples"});
                for (const auto& row : a.mi[m])
                    tw.row({row.feature, format_double(row.mean), format_double(row.sd), std::to_string(row.samples)});
                write_file(dir / ("mi_" + method_tag(m) + ".csv"), t.str());
            }
        }
        write_file(dir / "fitness_curves.csv", curves.str());
        write_file(dir / "best_fitness.csv", best.str());

        mww.row({"method_a", "method_b", "n_a", "n_b", "u", "p_two_sided", "p_a_greater", "exact"});
        for (const auto& ma : a.methods)
            for (const auto& mb : a.methods) {
                if (ma == mb)
                    continue;
                const auto& xa = a.best_per_run[ma];
                const auto& xb = a.best_per_run[mb];
                const auto two = mann_whitney_u(xa, xb, Alternative::two_sided);
                const auto gt = mann_whitney_u(xa, xb, Alternative::greater);
                a.comparisons.push_back({ma, mb, xa.size(), xb.size(), two.u, two.p, gt.p, two.exact});
                mww.row({ma, mb, std::to_string(xa.size()), std::to_string(xb.size()), format_double(two.u),
                         format_double(two.p), format_double(gt.p), two.exact ? "1" : "0"});
            }
        write_file(dir / "mann_whitney.csv", mw.str());

        // Exploration map: pooled, standardised, unweighted SDBC samples.
        std::vector<MethodSamples> samples;
        std::vector<std::vector<double>> pooled;
        for (const auto& m : a.methods) {
            MethodSamples s;
            s.method = m;
            for (const auto* r : by_method.at(m)) {
                const std::size_t n = r->sdbc.size();
                const std::size_t stride =
                    options.max_samples_per_run == 0 || n <= options.max_samples_per_run
                        ? 1
                        : (n + options.max_samples_per_run - 1) / options.max_samples_per_run;
                for (std::size_t i = 0; i < n; i += stride) {
                    s.samples.push_back(r->sdbc[i]);
                    s.fitness.push_back(r->fitness[i]);
                }
            }
            pooled.insert(pooled.end(), s.samples.begin(), s.samples.end());
            samples.push_back(std::move(s));
        }
        if (pooled.empty()) {
            log_line(log, task + ": no population logs, exploration map skipped");
        }
        else {
            const auto coeff = compute_standardisation(pooled);
            for (auto& p : pooled)
                p = apply_standardisation(p, coeff);
            for (auto& s : samples)
                for (auto& v : s.samples)
                    v = apply_standardisation(v, coeff);
            std::mt19937_64 rng(options.seed);
            const SomGrid map = train_som(pooled, options.som, rng);
            a.density = exploration_density(map, samples);
            std::ostringstream t;
            CsvWriter tw(t);
            tw.row({"cell", "x", "y", "method", "count", "mean_fitness", "best_cell"});
            for (std::size_t mi = 0; mi < a.density.methods.size(); ++mi)
                for (std::size_t c = 0; c < map.cells(); ++c) {
                    const double f = a.density.mean_fitness[mi][c];
                    tw.row({std::to_string(c), std::to_string(c % map.width), std::to_string(c / map.width),
                            a.density.methods[mi], std::to_string(a.density.counts[mi][c]),
                            std::isnan(f) ? "" : format_double(f),
                            a.density.has_best_cell && c == a.density.best_cell ? "1" : "0"});
                }
            write_file(dir / "som_density.csv", t.str());
            for (std::size_t mi = 0; mi < a.density.methods.size(); ++mi) {
                std::ostringstream svg;
                write_density_svg(svg, a.density, mi);
                write_file(dir / ("som_" + method_tag(a.density.methods[mi]) + ".svg"), svg.str());
            }
        }
        analyses.push_back(std::move(a));
    }
    return analyses;
}

} // namespace sdbc
