#pragma once

#include <stdexcept>
#include <string>

namespace fracdrift {

// Grid/shape/lineage mismatches and malformed configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numeric parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The operation exists but not for this kernel form / dimension / weight sign.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Picard iteration left the ball where the fixed-point bound holds.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fracdrift
