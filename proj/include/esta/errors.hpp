#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace esta {

/// Malformed input: bad arguments, unknown ids, unparsable files.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Scenario parameters that cannot be realised (e.g. area too small).
class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// At least one target can never deliver its result to the ground station.
class InfeasibleQuery : public std::runtime_error {
public:
    InfeasibleQuery(const std::string& what, std::vector<std::string> unreachable)
        : std::runtime_error(what), unreachable_(std::move(unreachable)) {}

    const std::vector<std::string>& unreachable() const { return unreachable_; }

private:
    std::vector<std::string> unreachable_;
};

/// A plan broke one of its own guarantees during replay. Always a bug.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace esta
