#pragma once

#include <stdexcept>
#include <string>

namespace leakage {

// Parameter or configuration outside its declared domain.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or unusable input data (trace files, fixtures).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Prior and mechanism assign zero joint mass to an observed trace.
class InconsistentModel : public DataError {
public:
    using DataError::DataError;
};

// A dispersion target that adding traffic cannot reach.
class InfeasibleTarget : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A metric whose denominator is empty (e.g. guessing error without anomalies).
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace leakage
