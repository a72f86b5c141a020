#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fabdry {

/// Argument outside the domain of a constitutive law or correlation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Failure while integrating the fabric IBVP. Carries the step index when known.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
        : std::runtime_error(step ? what + " (step " + std::to_string(*step) + ")" : what),
          message_(what), step_(step) {}

    std::optional<std::size_t> step_index() const noexcept { return step_; }
    const std::string& message() const noexcept { return message_; }

    SolverError at_step(std::size_t step) const { return SolverError(message_, step); }

private:
    std::string message_;
    std::optional<std::size_t> step_;
};

/// Invalid configuration file or value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid experimental dataset.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fabdry
