#pragma once

#include <stdexcept>
#include <string>

namespace vcgmm {

// Violated operation precondition or type invariant (caller bug).
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or unreadable input data (CSV/binary parsing, bad files).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite objective or other numerical breakdown during optimization.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vcgmm
