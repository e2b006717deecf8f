#pragma once

// Experiment configuration: YAML file <-> ExperimentConfig, schema validation
// with field paths, annotated defaults and SDBC_* environment overrides.

#include "sdbc/evolution.hpp"
#include "sdbc/tasks.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sdbc {

struct LogOptions {
    bool population = true;       // per-individual population.csv
    bool transformed = false;     // add standardised/weighted columns to population.csv
    std::size_t checkpoint_every = 10;
};

struct ExperimentConfig {
    std::string task = "resource_sharing";
    EvolutionConfig evolution;
    GateEscapeParams gate_escape;
    ResourceSharingParams resource_sharing;
    PredatorPreyParams predator_prey;
    LogOptions log;
    std::string output = "runs";
};

std::vector<std::string> task_names();

/// Task named by `config.task`, built from its parameter block.
std::unique_ptr<Task> make_task(const ExperimentConfig& config);

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

/// Applies SDBC_<PATH> variables, e.g. SDBC_GA_POPULATION or
/// SDBC_TASKS_GATE_ESCAPE_ROBOTS. `getenv` defaults to the process environment.
void apply_env_overrides(ExperimentConfig& config,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv = {});

/// YAML text; with `annotate`, assumed defaults carry a trailing comment.
std::string emit_config(const ExperimentConfig& config, bool annotate = false);

/// Dotted paths of every recognised field, in emission order.
std::vector<std::string> config_fields();

} // namespace sdbc
