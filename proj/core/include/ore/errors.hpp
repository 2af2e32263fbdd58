#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ore {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, labels out of range, bad options.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class InvalidShape : public Error {
public:
    using Error::Error;
};

class InvalidIndex : public Error {
public:
    using Error::Error;
};

/// Model or embedding file that does not satisfy its schema. The message
/// starts with the JSON location of the offending value.
class ModelFormatError : public Error {
public:
    ModelFormatError(const std::string& location, const std::string& what)
        : Error(location + ": " + what), location_(location) {}

    const std::string& location() const noexcept { return location_; }

private:
    std::string location_;
};

class UnknownWord : public Error {
public:
    explicit UnknownWord(const std::string& word)
        : Error("unknown word '" + word + "'"), word_(word) {}

    const std::string& word() const noexcept { return word_; }

private:
    std::string word_;
};

class TooLong : public Error {
public:
    TooLong(std::size_t length, std::size_t limit)
        : Error("text has " + std::to_string(length) + " words, limit is " + std::to_string(limit)) {}
};

/// A constrained explanation problem without a feasible solution (exclude constraints).
class Infeasible : public Error {
public:
    using Error::Error;
};

/// The verifier split budget or a solver iteration cap was hit before a verdict.
class ResourceExhausted : public Error {
public:
    using Error::Error;
};

/// Estimator with no probability mass to condition on.
class Undefined : public Error {
public:
    using Error::Error;
};

} // namespace ore
