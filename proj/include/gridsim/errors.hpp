#pragma once

#include <stdexcept>
#include <string>

namespace gridsim {

// Validation failure. Carries the offending parameter name so the CLI can
// report it and map to exit code 1.
class InvalidParameter : public std::invalid_argument {
public:
    InvalidParameter(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Exact-solver budget exceeded (e.g. too many Steiner terminals or
// enumeration indicators). Callers may retry in heuristic-only mode.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough data to fit the requested statistic.
class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A merge operator broke an algebraic law mid-run; what() carries the witness.
class MonoidLawViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gridsim
