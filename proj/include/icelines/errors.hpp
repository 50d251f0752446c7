#pragma once

#include <stdexcept>
#include <string>

namespace icelines {

/// Argument outside the domain of a model function (|y| > 1, eta_S > eta_N, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid scenario configuration or parameter set.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for every numerical failure: integration, root location, fixed-point search.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StiffnessError : public SolverError {
public:
    using SolverError::SolverError;
};

/// The trajectory left the admissible state space.
class BoundaryError : public SolverError {
public:
    BoundaryError(const std::string& what, double time) : SolverError(what), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

class NoEventError : public SolverError {
public:
    using SolverError::SolverError;
};

class ConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace icelines
