#pragma once

#include <stdexcept>
#include <string>

namespace nmpsim {

// Base class for all simulator errors.
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// An instruction field does not fit its encoded width (or violates a
// field-level precondition such as num_inputs < 2 for REDUCE).
class FieldOverflowError : public SimError {
public:
    using SimError::SimError;
};

// A size that must be a multiple of the 64-byte access granularity is not.
class MisalignedSizeError : public SimError {
public:
    using SimError::SimError;
};

// A gather index references a row past the end of its table.
class IndexOutOfRangeError : public SimError {
public:
    using SimError::SimError;
};

// An address is misaligned or falls outside the pool / rank capacity,
// or an instruction's destination overlaps one of its sources.
class AddressFaultError : public SimError {
public:
    using SimError::SimError;
};

// A trace or hex line could not be parsed. Carries the 1-based line number.
class ParseError : public SimError {
public:
    ParseError(const std::string& what, std::size_t line)
        : SimError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// An experiment configuration is inconsistent or contains unknown keys.
class ConfigError : public SimError {
public:
    using SimError::SimError;
};

}  // namespace nmpsim
