#include "sdbc/config.hpp"

#include "sdbc/errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace sdbc {

namespace {

constexpr std::string_view assumed = "assumed";

struct Field {
    std::string path;
    std::string_view note; // empty: documented value
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

std::string trim(std::string s)
{
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

double to_double(const std::string& path, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(path, "expected a finite number, got '" + text + "'");
    return v;
}

std::uint64_t to_unsigned(const std::string& path, const std::string& text)
{
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigError(path, "expected a non-negative integer, got '" + text + "'");
    return v;
}

bool to_bool(const std::string& path, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "on" || t == "1")
        return true;
    if (t == "false" || t == "no" || t == "off" || t == "0")
        return false;
    throw ConfigError(path, "expected true or false, got '" + text + "'");
}

std::string number(double v) { return fmt::format("{}", v); }

template <class Get>
Field real(std::string path, Get get, double lo, double hi, std::string_view note = assumed)
{
    Field f;
    f.note = note;
    f.get = [get](const ExperimentConfig& c) { return number(get(const_cast<ExperimentConfig&>(c))); };
    f.set = [get, lo, hi, path](ExperimentConfig& c, const std::string& text) {
        const double v = to_double(path, text);
        if (v < lo || v > hi)
            throw ConfigError(path, fmt::format("value {} outside [{}, {}]", v, lo, hi));
        get(c) = v;
    };
    f.path = std::move(path);
    return f;
}

template <class Get>
Field integer(std::string path, Get get, std::uint64_t lo, std::uint64_t hi, std::string_view note = assumed)
{
    Field f;
    f.note = note;
    f.get = [get](const ExperimentConfig& c) { return std::to_string(get(const_cast<ExperimentConfig&>(c))); };
    f.set = [get, lo, hi, path](ExperimentConfig& c, const std::string& text) {
        const std::uint64_t v = to_unsigned(path, text);
        if (v < lo || v > hi)
            throw ConfigError(path, fmt::format("value {} outside [{}, {}]", v, lo, hi));
        get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(v);
    };
    f.path = std::move(path);
    return f;
}

template <class Get>
Field boolean(std::string path, Get get, std::string_view note = {})
{
    Field f;
    f.note = note;
    f.get = [get](const ExperimentConfig& c) { return std::string(get(const_cast<ExperimentConfig&>(c)) ? "true" : "false"); };
    f.set = [get, path](ExperimentConfig& c, const std::string& text) { get(c) = to_bool(path, text); };
    f.path = std::move(path);
    return f;
}

Field layout_field(std::string path, GroupLayout& (*get)(ExperimentConfig&))
{
    Field f;
    f.get = [get](const ExperimentConfig& c) { return std::string(to_string(get(const_cast<ExperimentConfig&>(c)))); };
    f.set = [get, path](ExperimentConfig& c, const std::string& text) {
        auto l = parse_group_layout(trim(text));
        if (!l)
            throw ConfigError(path, "unknown layout '" + text + "' (expected canonical or naive)");
        get(c) = *l;
    };
    f.path = std::move(path);
    return f;
}

void robot_fields(std::vector<Field>& out, const std::string& prefix, RobotParams& (*get)(ExperimentConfig&))
{
    out.push_back(real(prefix + ".robot_radius", [get](ExperimentConfig& c) -> double& { return get(c).radius; }, 1e-3, 1.0));
    out.push_back(real(prefix + ".max_speed", [get](ExperimentConfig& c) -> double& { return get(c).max_speed; }, 1e-3, 10.0));
    out.push_back(real(prefix + ".dt", [get](ExperimentConfig& c) -> double& { return get(c).dt; }, 1e-3, 1.0));
    out.push_back(real(prefix + ".sensor_noise", [get](ExperimentConfig& c) -> double& { return get(c).sensor_noise; }, 0.0, 1.0));
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        {
            Field f;
            f.path = "task";
            f.get = [](const ExperimentConfig& c) { return c.task; };
            f.set = [](ExperimentConfig& c, const std::string& text) {
                const auto names = task_names();
                const std::string v = trim(text);
                if (std::find(names.begin(), names.end(), v) == names.end())
                    throw ConfigError("task", "unknown task '" + text + "'");
                c.task = v;
            };
            t.push_back(std::move(f));
        }
        {
            Field f;
            f.path = "method";
            f.get = [](const ExperimentConfig& c) { return std::string(to_string(c.evolution.method)); };
            f.set = [](ExperimentConfig& c, const std::string& text) {
                auto m = parse_method(trim(text));
                if (!m)
                    throw ConfigError("method", "unknown method '" + text + "' (expected fit, ns-ts, ns-sd or ns-sd+)");
                c.evolution.method = *m;
            };
            t.push_back(std::move(f));
        }
        t.push_back(integer("seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.evolution.seed; }, 0,
                            std::numeric_limits<std::uint64_t>::max(), {}));
        t.push_back(integer("trials", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.trials; }, 1, 1000, {}));
        {
            Field f;
            f.path = "output";
            f.get = [](const ExperimentConfig& c) { return c.output; };
            f.set = [](ExperimentConfig& c, const std::string& text) {
                if (trim(text).empty())
                    throw ConfigError("output", "must not be empty");
                c.output = trim(text);
            };
            t.push_back(std::move(f));
        }

        t.push_back(integer("ga.population", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.ga.population; }, 2, 100000));
        t.push_back(integer("ga.generations", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.ga.generations; }, 1, 1000000));
        t.push_back(integer("ga.elites", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.ga.elites; }, 0, 100000));
        t.push_back(integer("ga.tournament", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.ga.tournament; }, 1, 1000));
        t.push_back(real("ga.crossover", [](ExperimentConfig& c) -> double& { return c.evolution.ga.p_crossover; }, 0.0, 1.0));
        t.push_back(real("ga.mutation", [](ExperimentConfig& c) -> double& { return c.evolution.ga.p_mutation; }, 0.0, 1.0));
        t.push_back(real("ga.sigma", [](ExperimentConfig& c) -> double& { return c.evolution.ga.sigma; }, 1e-9, weight_limit));
        t.push_back(integer("ga.hidden", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.ga.hidden; }, 1, 1000));
        t.push_back(real("ga.init_range", [](ExperimentConfig& c) -> double& { return c.evolution.ga.init_range; }, 1e-9, weight_limit));

        t.push_back(integer("novelty.k", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.novelty.k; }, 1, 100000));
        t.push_back(real("novelty.archive_rate", [](ExperimentConfig& c) -> double& { return c.evolution.novelty.archive_rate; }, 0.0, 1.0));

        t.push_back(real("sdbc.delta", [](ExperimentConfig& c) -> double& { return c.evolution.sdbc.delta; }, 0.0, 100.0, {}));
        t.push_back(integer("sdbc.min_bins", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.sdbc.binning.min_bins; }, 2, 1024));
        t.push_back(integer("sdbc.max_bins", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.sdbc.binning.max_bins; }, 2, 1024));
        t.push_back(integer("sdbc.weight_period", [](ExperimentConfig& c) -> std::size_t& { return c.evolution.sdbc.weight_period; }, 1, 1000000));

        t.push_back(boolean("log.population", [](ExperimentConfig& c) -> bool& { return c.log.population; }));
        t.push_back(boolean("log.transformed", [](ExperimentConfig& c) -> bool& { return c.log.transformed; }));
        t.push_back(integer("log.checkpoint_every", [](ExperimentConfig& c) -> std::size_t& { return c.log.checkpoint_every; }, 1, 1000000, {}));

        {
            const std::string p = "tasks.gate_escape";
            using C = ExperimentConfig;
            robot_fields(t, p, [](C& c) -> RobotParams& { return c.gate_escape.robot; });
            t.push_back(integer(p + ".robots", [](C& c) -> std::size_t& { return c.gate_escape.robots; }, 1, 64));
            t.push_back(real(p + ".arena_size", [](C& c) -> double& { return c.gate_escape.arena_size; }, 0.1, 100.0));
            t.push_back(real(p + ".gate_width", [](C& c) -> double& { return c.gate_escape.gate_width; }, 0.01, 100.0));
            t.push_back(integer(p + ".close_delay", [](C& c) -> std::size_t& { return c.gate_escape.close_delay; }, 0, 100000));
            t.push_back(integer(p + ".grace_steps", [](C& c) -> std::size_t& { return c.gate_escape.grace_steps; }, 0, 100000));
            t.push_back(integer(p + ".max_steps", [](C& c) -> std::size_t& { return c.gate_escape.max_steps; }, 1, 1000000));
            t.push_back(real(p + ".gate_sense_range", [](C& c) -> double& { return c.gate_escape.gate_sense_range; }, 0.0, 1000.0));
            t.push_back(real(p + ".robot_sense_range", [](C& c) -> double& { return c.gate_escape.robot_sense_range; }, 0.0, 1000.0));
            t.push_back(real(p + ".wall_sense_range", [](C& c) -> double& { return c.gate_escape.wall_sense_range; }, 1e-6, 1000.0));
            t.push_back(layout_field(p + ".layout", [](C& c) -> GroupLayout& { return c.gate_escape.layout; }));
        }
        {
            const std::string p = "tasks.resource_sharing";
            using C = ExperimentConfig;
            robot_fields(t, p, [](C& c) -> RobotParams& { return c.resource_sharing.robot; });
            t.push_back(integer(p + ".robots", [](C& c) -> std::size_t& { return c.resource_sharing.robots; }, 1, 64));
            t.push_back(real(p + ".arena_size", [](C& c) -> double& { return c.resource_sharing.arena_size; }, 0.1, 100.0));
            t.push_back(real(p + ".max_energy", [](C& c) -> double& { return c.resource_sharing.max_energy; }, 1e-6, 1e9));
            t.push_back(real(p + ".initial_energy", [](C& c) -> double& { return c.resource_sharing.initial_energy; }, 1e-6, 1e9));
            t.push_back(real(p + ".base_consumption", [](C& c) -> double& { return c.resource_sharing.base_consumption; }, 0.0, 1e9));
            t.push_back(real(p + ".speed_consumption", [](C& c) -> double& { return c.resource_sharing.speed_consumption; }, 0.0, 1e9));
            t.push_back(real(p + ".recharge", [](C& c) -> double& { return c.resource_sharing.recharge; }, 0.0, 1e9));
            t.push_back(real(p + ".station_radius", [](C& c) -> double& { return c.resource_sharing.station_radius; }, 1e-6, 100.0));
            t.push_back(integer(p + ".max_steps", [](C& c) -> std::size_t& { return c.resource_sharing.max_steps; }, 1, 1000000));
            t.push_back(real(p + ".robot_sense_range", [](C& c) -> double& { return c.resource_sharing.robot_sense_range; }, 0.0, 1000.0));
            t.push_back(layout_field(p + ".layout", [](C& c) -> GroupLayout& { return c.resource_sharing.layout; }));
        }
        {
            const std::string p = "tasks.predator_prey";
            using C = ExperimentConfig;
            robot_fields(t, p, [](C& c) -> RobotParams& { return c.predator_prey.robot; });
            t.push_back(integer(p + ".predators", [](C& c) -> std::size_t& { return c.predator_prey.predators; }, 1, 64));
            t.push_back(real(p + ".arena_size", [](C& c) -> double& { return c.predator_prey.arena_size; }, 0.1, 1000.0));
            t.push_back(real(p + ".zone_radius", [](C& c) -> double& { return c.predator_prey.zone_radius; }, 0.01, 1000.0));
            t.push_back(integer(p + ".max_steps", [](C& c) -> std::size_t& { return c.predator_prey.max_steps; }, 1, 1000000));
            t.push_back(real(p + ".prey_speed", [](C& c) -> double& { return c.predator_prey.prey_speed; }, 0.0, 100.0));
            t.push_back(real(p + ".prey_sense_range", [](C& c) -> double& { return c.predator_prey.prey_sense_range; }, 0.0, 1000.0));
            t.push_back(real(p + ".prey_sensor_range", [](C& c) -> double& { return c.predator_prey.prey_sensor_range; }, 0.0, 1000.0));
            t.push_back(real(p + ".predator_sensor_range", [](C& c) -> double& { return c.predator_prey.predator_sensor_range; }, 0.0, 1000.0));
            t.push_back(real(p + ".prey_start_min", [](C& c) -> double& { return c.predator_prey.prey_start_min; }, 0.0, 1000.0));
            t.push_back(real(p + ".prey_start_max", [](C& c) -> double& { return c.predator_prey.prey_start_max; }, 0.0, 1000.0));
            t.push_back(layout_field(p + ".layout", [](C& c) -> GroupLayout& { return c.predator_prey.layout; }));
        }
        return t;
    }();
    return table;
}

const Field* find_field(const std::string& path)
{
    for (const auto& f : fields())
        if (f.path == path)
            return &f;
    return nullptr;
}

void apply_node(ExperimentConfig& c, const YAML::Node& node, const std::string& prefix)
{
    if (node.IsNull())
        return;
    if (!node.IsMap())
        throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected a mapping");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        const YAML::Node& value = kv.second;
        if (value.IsMap()) {
            const bool known_prefix = std::any_of(fields().begin(), fields().end(), [&](const Field& f) {
                return f.path.rfind(path + ".", 0) == 0;
            });
            if (!known_prefix)
                throw ConfigError(path, "unknown section");
            apply_node(c, value, path);
            continue;
        }
        const Field* f = find_field(path);
        if (!f)
            throw ConfigError(path, "unknown key");
        if (!value.IsScalar())
            throw ConfigError(path, "expected a scalar value");
        f->set(c, value.Scalar());
    }
}

} // namespace

std::vector<std::string> task_names() { return {"gate_escape", "resource_sharing", "predator_prey"}; }

std::unique_ptr<Task> make_task(const ExperimentConfig& config)
{
    if (config.task == "gate_escape")
        return std::make_unique<GateEscapeTask>(config.gate_escape);
    if (config.task == "resource_sharing")
        return std::make_unique<ResourceSharingTask>(config.resource_sharing);
    if (config.task == "predator_prey")
        return std::make_unique<PredatorPreyTask>(config.predator_prey);
    throw ConfigError("task", "unknown task '" + config.task + "'");
}

void validate(const ExperimentConfig& c)
{
    const auto names = task_names();
    if (std::find(names.begin(), names.end(), c.task) == names.end())
        throw ConfigError("task", "unknown task '" + c.task + "'");
    const auto& ga = c.evolution.ga;
    if (ga.elites > ga.population)
        throw ConfigError("ga.elites", "exceeds ga.population");
    if (ga.population < 2)
        throw ConfigError("ga.population", "must be at least 2");
    if (c.evolution.sdbc.binning.min_bins > c.evolution.sdbc.binning.max_bins)
        throw ConfigError("sdbc.min_bins", "exceeds sdbc.max_bins");
    if (c.resource_sharing.initial_energy > c.resource_sharing.max_energy)
        throw ConfigError("tasks.resource_sharing.initial_energy", "exceeds max_energy");
    if (c.gate_escape.gate_width <= 2.0 * c.gate_escape.robot.radius || c.gate_escape.gate_width >= c.gate_escape.arena_size)
        throw ConfigError("tasks.gate_escape.gate_width", "must exceed the robot diameter and be smaller than the arena");
    const auto& pp = c.predator_prey;
    if (pp.prey_start_min > pp.prey_start_max)
        throw ConfigError("tasks.predator_prey.prey_start_min", "exceeds prey_start_max");
    if (pp.prey_start_max >= pp.zone_radius)
        throw ConfigError("tasks.predator_prey.prey_start_max", "must be inside the chase zone");
    if (2.0 * pp.zone_radius > pp.arena_size)
        throw ConfigError("tasks.predator_prey.zone_radius", "chase zone does not fit in the arena");
    try {
        (void)make_task(c);
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError("tasks." + c.task, e.what());
    }
}

ExperimentConfig parse_config(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    }
    catch (const YAML::Exception& e) {
        throw ConfigError("<file>", std::string("YAML syntax error: ") + e.what());
    }
    ExperimentConfig c;
    apply_node(c, root, "");
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("<file>", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_env_overrides(ExperimentConfig& config,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv)
{
    auto lookup = getenv ? getenv : [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        return v ? std::optional<std::string>(v) : std::nullopt;
    };
    for (const auto& f : fields()) {
        std::string var = "SDBC_";
        for (char ch : f.path)
            var += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (auto v = lookup(var))
            f.set(config, *v);
    }
    validate(config);
}

std::string emit_config(const ExperimentConfig& config, bool annotate)
{
    std::string out;
    if (annotate)
        out += "# Fields marked 'assumed' are defaults chosen for this implementation.\n";
    std::vector<std::string> open; // currently emitted section path
    for (const auto& f : fields()) {
        std::vector<std::string> parts;
        std::stringstream ss(f.path);
        for (std::string p; std::getline(ss, p, '.');)
            parts.push_back(p);
        const std::vector<std::string> section(parts.begin(), parts.end() - 1);
        std::size_t common = 0;
        while (common < open.size() && common < section.size() && open[common] == section[common])
            ++common;
        for (std::size_t d = common; d < section.size(); ++d)
            out += std::string(2 * d, ' ') + section[d] + ":\n";
        open = section;
        std::string value = f.get(config);
        const bool needs_quote = value.empty() || value.find_first_of(":#{}[],&*!|>'\"%@`") != std::string::npos;
        if (needs_quote)
            value = "\"" + value + "\"";
        out += std::string(2 * section.size(), ' ') + parts.back() + ": " + value;
        if (annotate && !f.note.empty())
            out += "  # " + std::string(f.note);
        out += '\n';
    }
    return out;
}

std::vector<std::string> config_fields()
{
    std::vector<std::string> out;
    for (const auto& f : fields())
        out.push_back(f.path);
    return out;
}

} // namespace sdbc
