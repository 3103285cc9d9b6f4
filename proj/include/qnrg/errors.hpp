#pragma once

#include <stdexcept>
#include <string>

namespace qnrg {

// Base class for all library errors. Subclasses mirror the failure
// categories surfaced by the CLI (machine-readable `kind`).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// An argument lies outside the mathematical domain of a formula.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error("domain", msg) {}
};

// A model parameter required for evaluation has not been calibrated.
class CalibrationGapError : public Error {
public:
    explicit CalibrationGapError(const std::string& msg) : Error("calibration_gap", msg) {}
};

// Measurements contradict each other or the model (e.g. negative fitted work).
class InconsistentMeasurementError : public Error {
public:
    explicit InconsistentMeasurementError(const std::string& msg)
        : Error("inconsistent_measurement", msg) {}
};

// Inputs degenerate to an unsolvable system (e.g. two points with equal abscissa).
class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& msg) : Error("degenerate_input", msg) {}
};

// Unknown id in a registry or table.
class LookupError : public Error {
public:
    explicit LookupError(const std::string& msg) : Error("lookup", msg) {}
};

// Malformed input file or record.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error("schema", msg) {}
};

// A prediction was requested outside the range where the model is meaningful.
class ExtrapolationError : public Error {
public:
    explicit ExtrapolationError(const std::string& msg) : Error("extrapolation", msg) {}
};

}  // namespace qnrg
