#include "sdbc/formalism.hpp"

#include "sdbc/errors.hpp"

#include <algorithm>

namespace sdbc {

void EntityGroup::validate() const
{
    if (eta_min > eta_max)
        throw std::invalid_argument("group '" + name + "': eta_min > eta_max");
    if (entities.size() < eta_min || entities.size() > eta_max)
        throw std::invalid_argument("group '" + name + "': size " + std::to_string(entities.size()) +
                                    " outside [" + std::to_string(eta_min) + ", " + std::to_string(eta_max) + "]");
    for (const auto& e : entities)
        if (e.theta.size() != kappa())
            throw std::invalid_argument("group '" + name + "': entity arity differs from kappa");
}

bool TaskStateSnapshot::pair_excluded(std::size_t a, std::size_t b) const noexcept
{
    return std::any_of(excluded_pairs.begin(), excluded_pairs.end(), [&](const GroupPair& p) {
        return (p.a == a && p.b == b) || (p.a == b && p.b == a);
    });
}

double group_size_feature(const EntityGroup& g)
{
    if (g.eta_max <= g.eta_min)
        throw DegenerateGroupError("group '" + g.name + "': size feature undefined for eta_max == eta_min");
    return (static_cast<double>(g.size()) - static_cast<double>(g.eta_min)) /
           static_cast<double>(g.eta_max - g.eta_min);
}

void group_mean_state(const EntityGroup& g, std::span<double> out)
{
    if (g.entities.empty())
        throw EmptyGroupError("group '" + g.name + "': mean state of an empty group");
    require_same_length(out.size(), g.kappa(), "group_mean_state");
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& e : g.entities)
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] += e.theta[j];
    const double n = static_cast<double>(g.size());
    for (auto& v : out)
        v /= n;
}

std::vector<double> group_mean_state(const EntityGroup& g)
{
    std::vector<double> out(g.kappa());
    group_mean_state(g, out);
    return out;
}

double group_dispersion(const EntityGroup& g, const DistanceFunction& f)
{
    const std::size_t n = g.size();
    if (n < 2)
        throw EmptyGroupError("group '" + g.name + "': dispersion needs at least two entities");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                sum += f(g.entities[i], g.entities[j]);
    const double d = static_cast<double>(n - 1);
    return sum / (d * d);
}

double group_pair_distance(const EntityGroup& a, const EntityGroup& b, const DistanceFunction& f)
{
    if (a.entities.empty() || b.entities.empty())
        throw EmptyGroupError("pair distance between '" + a.name + "' and '" + b.name + "' with an empty group");
    double sum = 0.0;
    for (const auto& ea : a.entities)
        for (const auto& eb : b.entities)
            sum += f(ea, eb);
    return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::uint64_t schema_hash(std::span<const std::string> names)
{
    // FNV-1a over the names, separated by '\n'.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& n : names) {
        for (unsigned char c : n)
            mix(c);
        mix('\n');
    }
    return h;
}

FeatureSchema feature_schema(const TaskStateSnapshot& layout)
{
    FeatureSchema schema;
    const auto& groups = layout.groups;
    for (const auto& g : groups)
        if (g.eta_max > g.eta_min)
            schema.names.push_back(g.name + " group size");
    for (const auto& g : groups)
        for (const auto& attr : g.attributes)
            schema.names.push_back(g.name + " " + attr);
    for (const auto& g : groups)
        if (g.eta_max > 1)
            schema.names.push_back(g.name + " dispersion");
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j)
            if (!layout.pair_excluded(i, j))
                schema.names.push_back(groups[i].name + "-" + groups[j].name + " distance");
    schema.id = schema_hash(schema.names);
    return schema;
}

FeatureExtractor::FeatureExtractor(const TaskStateSnapshot& layout)
    : schema_(std::make_shared<const FeatureSchema>(feature_schema(layout)))
{
    const auto& groups = layout.groups;
    std::size_t max_kappa = 0;
    for (std::size_t i = 0; i < groups.size(); ++i)
        if (groups[i].eta_max > groups[i].eta_min)
            slots_.push_back({Kind::size, i, 0});
    for (std::size_t i = 0; i < groups.size(); ++i) {
        max_kappa = std::max(max_kappa, groups[i].kappa());
        for (std::size_t j = 0; j < groups[i].kappa(); ++j)
            slots_.push_back({Kind::mean, i, j});
    }
    for (std::size_t i = 0; i < groups.size(); ++i)
        if (groups[i].eta_max > 1)
            slots_.push_back({Kind::dispersion, i, 0});
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j)
            if (!layout.pair_excluded(i, j))
                slots_.push_back({Kind::pair, i, j});
    previous_.assign(slots_.size(), 0.0);
    mean_buffer_.resize(max_kappa);
}

void FeatureExtractor::reset()
{
    std::fill(previous_.begin(), previous_.end(), 0.0);
}

void FeatureExtractor::extract_into(const TaskStateSnapshot& s, std::span<double> out)
{
    require_same_length(out.size(), slots_.size(), "FeatureExtractor::extract_into");
    std::size_t mean_group = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k < slots_.size(); ++k) {
        const Slot& slot = slots_[k];
        const EntityGroup& g = s.groups[slot.group];
        double value = previous_[k];
        switch (slot.kind) {
        case Kind::size:
            value = group_size_feature(g);
            break;
        case Kind::mean:
            if (!g.entities.empty()) {
                if (mean_group != slot.group) {
                    group_mean_state(g, std::span<double>(mean_buffer_.data(), g.kappa()));
                    mean_group = slot.group;
                }
                value = mean_buffer_[slot.other];
            }
            break;
        case Kind::dispersion:
            if (g.size() == 1)
                value = 0.0;
            else if (g.size() > 1)
                value = group_dispersion(g, s.distance);
            break;
        case Kind::pair: {
            const EntityGroup& h = s.groups[slot.other];
            if (!g.entities.empty() && !h.entities.empty())
                value = group_pair_distance(g, h, s.distance);
            break;
        }
        }
        out[k] = value;
        previous_[k] = value;
    }
}

FeatureSnapshot FeatureExtractor::extract(const TaskStateSnapshot& s)
{
    FeatureSnapshot snap{std::vector<double>(slots_.size()), schema_};
    extract_into(s, snap.values);
    return snap;
}

FeatureSnapshot extract_features(const TaskStateSnapshot& s)
{
    FeatureExtractor fx(s);
    return fx.extract(s);
}

} // namespace sdbc
