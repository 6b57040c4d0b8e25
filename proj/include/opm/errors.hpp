#pragma once

#include <stdexcept>
#include <string>

namespace opm {

// Bad inputs, malformed files, contract violations. CLI maps these to exit 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failures carry file/record context in the message.
class ParseError : public ValidationError {
public:
    explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

// NaN/Inf and other numeric failures. CLI maps these to exit 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace opm
