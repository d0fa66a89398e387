#pragma once

#include <stdexcept>
#include <string>

namespace dualstack {

// Base for everything caused by bad input (files, flags, literals).
// The CLI maps these to exit code 1; std::logic_error maps to 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text: address literals, CSV rows, config lines.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

// Structurally valid input that violates a constraint (duplicate policy
// prefix, missing network entry, bad scenario field).
class ConfigError : public InputError {
public:
    using InputError::InputError;
};

// No usable source address for a destination.
class NoRouteError : public InputError {
public:
    using InputError::InputError;
};

} // namespace dualstack
