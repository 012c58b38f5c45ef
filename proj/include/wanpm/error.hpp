#pragma once

#include <stdexcept>
#include <string>

namespace wanpm {

/// A parameter lies outside its mathematical domain (alpha, dt, scale, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Caller violated a shape or usage contract.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Particle integration produced a non-finite state.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite loss, quadrature failure and similar numerical breakdowns.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wanpm
