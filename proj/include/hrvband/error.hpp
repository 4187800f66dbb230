#pragma once

#include <stdexcept>
#include <string>

namespace hrvband {

/// Malformed or unusable input data (files, series contents).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters outside their documented valid range.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An internal invariant was violated. Indicates a bug, never bad input.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace hrvband
