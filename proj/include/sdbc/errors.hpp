#pragma once

#include <stdexcept>
#include <string>

namespace sdbc {

/// Raised when a per-group feature is requested on a group it is undefined for
/// (empty group, singleton dispersion).
class EmptyGroupError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Group size feature requested on a group with eta_max == eta_min.
class DegenerateGroupError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SchemaMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LengthMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid experiment configuration. `what()` starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline void require_same_length(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
        throw LengthMismatchError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                                  std::to_string(b) + ")");
}

} // namespace sdbc
