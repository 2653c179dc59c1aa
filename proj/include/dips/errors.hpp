#pragma once

#include <stdexcept>
#include <string>

namespace dips {

// Precondition violated by the caller (bad dimensions, inverted bounds, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite state produced while integrating a trajectory.
class SimulationFault : public std::runtime_error {
public:
    SimulationFault(const std::string& what, double time_s)
        : std::runtime_error(what + " at t=" + std::to_string(time_s) + " s"), time_s_(time_s) {}

    double time_s() const noexcept { return time_s_; }

private:
    double time_s_;
};

// Configuration file rejected at load time. Carries every problem found.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dips
