#pragma once

#include <stdexcept>
#include <string>

namespace naclab {

/// Malformed inputs: dimension mismatches, invalid config values, bad files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A modelling assumption required by the analysis does not hold
/// (e.g. the behavior chain is not irreducible and aperiodic).
class AssumptionViolation : public std::runtime_error {
public:
    explicit AssumptionViolation(const std::string& msg) : std::runtime_error(msg) {}
};

/// A finite-sample bound was requested outside its preconditions.
/// Evaluators throw this instead of returning a silent number.
class BoundInapplicable : public std::runtime_error {
public:
    explicit BoundInapplicable(const std::string& msg) : std::runtime_error(msg) {}
};

/// Weighted least-squares system is rank deficient; no unique minimizer.
class DegenerateSystem : public std::runtime_error {
public:
    explicit DegenerateSystem(const std::string& msg) : std::runtime_error(msg) {}
};

/// Index or input-range error on otherwise valid objects.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace naclab
