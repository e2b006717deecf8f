#pragma once

// Task-state description (entity groups + distance function) and the per-step
// behaviour features extracted from it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sdbc {

/// One entity of the task: time-varying attributes plus constant properties.
struct EntityState {
    std::vector<double> theta;
    std::vector<double> props;
};

/// Entities sharing the same attribute arity. `attributes` names the kappa
/// attributes; its length is kappa.
struct EntityGroup {
    std::string name;
    std::vector<std::string> attributes;
    std::size_t eta_min = 0;
    std::size_t eta_max = 1;
    std::vector<EntityState> entities;

    std::size_t kappa() const noexcept { return attributes.size(); }
    std::size_t size() const noexcept { return entities.size(); }

    /// Checks eta_min <= |entities| <= eta_max and per-entity arity.
    void validate() const;
};

/// Symmetric, non-negative physical distance between two entities, possibly
/// from groups with different kappa.
using DistanceFunction = std::function<double(const EntityState&, const EntityState&)>;

struct GroupPair {
    std::size_t a = 0;
    std::size_t b = 0;
};

/// Ordered entity groups plus the distance function. Group order and identity
/// are fixed for one simulation. `excluded_pairs` lists unordered group pairs
/// whose pair-distance feature is not emitted (layouts that drop constant
/// relations).
struct TaskStateSnapshot {
    std::vector<EntityGroup> groups;
    DistanceFunction distance;
    std::vector<GroupPair> excluded_pairs;

    bool pair_excluded(std::size_t a, std::size_t b) const noexcept;
};

/// (|g| - eta_min) / (eta_max - eta_min). Throws DegenerateGroupError when
/// eta_max == eta_min.
double group_size_feature(const EntityGroup& g);

/// Per-attribute arithmetic mean over the members. Throws EmptyGroupError on an
/// empty group.
std::vector<double> group_mean_state(const EntityGroup& g);
void group_mean_state(const EntityGroup& g, std::span<double> out);

/// Sum over ordered pairs i != j of f(e_i, e_j), divided by (|g| - 1)^2.
/// Throws EmptyGroupError when |g| < 2.
double group_dispersion(const EntityGroup& g, const DistanceFunction& f);

/// Mean distance over all |a||b| cross pairs. Throws EmptyGroupError when
/// either group is empty.
double group_pair_distance(const EntityGroup& a, const EntityGroup& b, const DistanceFunction& f);

/// Names of the per-step features, in emission order. `id` is a hash of the
/// names and identifies the schema.
struct FeatureSchema {
    std::vector<std::string> names;
    std::uint64_t id = 0;

    std::size_t size() const noexcept { return names.size(); }
};

/// Builds the schema from group declarations only (entity lists are ignored):
/// sizes for groups with eta_max > eta_min, mean attributes for groups with
/// kappa >= 1, dispersion for groups with eta_max > 1, then pair distances for
/// every non-excluded unordered pair (i < j).
FeatureSchema feature_schema(const TaskStateSnapshot& layout);

std::uint64_t schema_hash(std::span<const std::string> names);

/// One sample of the per-step features.
struct FeatureSnapshot {
    std::vector<double> values;
    std::shared_ptr<const FeatureSchema> schema;

    std::uint64_t schema_id() const noexcept { return schema ? schema->id : 0; }
};

/// Stateful per-simulation extractor. Features that are undefined at a step
/// (mean state or pair distance involving an empty group, dispersion of an
/// empty group) repeat the previous step's value, or 0 on the first step.
/// Dispersion of a singleton group is 0.
class FeatureExtractor {
public:
    explicit FeatureExtractor(const TaskStateSnapshot& layout);

    const std::shared_ptr<const FeatureSchema>& schema() const noexcept { return schema_; }
    std::size_t size() const noexcept { return schema_->size(); }

    FeatureSnapshot extract(const TaskStateSnapshot& s);
    void extract_into(const TaskStateSnapshot& s, std::span<double> out);
    void reset();

private:
    enum class Kind { size, mean, dispersion, pair };
    struct Slot {
        Kind kind;
        std::size_t group;
        std::size_t other; // attribute index for means, second group for pairs
    };

    std::shared_ptr<const FeatureSchema> schema_;
    std::vector<Slot> slots_;
    std::vector<double> previous_;
    std::vector<double> mean_buffer_;
};

/// Single-snapshot extraction (empty-group features read as 0).
FeatureSnapshot extract_features(const TaskStateSnapshot& s);

} // namespace sdbc
