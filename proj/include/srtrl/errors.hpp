#pragma once

#include <stdexcept>
#include <string>

#include "srtrl/types.hpp"

namespace srtrl {

/// Shape or domain precondition broken by the caller.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A sensitivity, parameter or loss became non-finite. Runs record this as
/// an outcome rather than propagating it.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, Step step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    Step step() const noexcept { return step_; }

private:
    Step step_;
};

/// A recovery ratio whose denominator vanishes or whose logs are undefined.
class UndefinedGapError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class IngestionError : public std::runtime_error {
public:
    IngestionError(const std::string& what, Index row)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

    Index row() const noexcept { return row_; }

private:
    Index row_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace srtrl
