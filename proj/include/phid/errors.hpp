#pragma once

#include <stdexcept>
#include <string>

namespace phid {

// Invalid configuration or mismatched dimensions. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

class DimensionError : public ConfigError {
public:
	using ConfigError::ConfigError;
};

// Non-finite values, singular step matrices, failed factorizations.
// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

// Violated call contract (programming error on the caller's side).
class ContractError : public std::logic_error {
public:
	using std::logic_error::logic_error;
};

} // namespace phid
