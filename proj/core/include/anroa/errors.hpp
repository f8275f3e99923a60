#pragma once

#include <stdexcept>
#include <string>

namespace anroa {

/// Invalid or inconsistent configuration. The message names the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical model could not produce a value (root finder did not converge).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs for which an operation is mathematically undefined.
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Plant or controller fault raised during a simulation run.
class SimulationFault : public std::runtime_error {
public:
    SimulationFault(double time, const std::string& what)
        : std::runtime_error("t=" + std::to_string(time) + " s: " + what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace anroa
