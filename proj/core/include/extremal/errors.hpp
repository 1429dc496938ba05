#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace extremal {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed field expression. position() is the 0-based character offset into
// the full source text handed to parse_field.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error(message + " (at offset " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Non-finite evaluation or a linear solve that should never be singular.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Frame f_1..f_n (or the control part f_1..f_k) degenerate at a queried point.
class FrameError : public Error {
public:
    using Error::Error;
};

// An operation was called outside its precondition (non-skew input, zero
// covector, condition violated, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// The configured chart is too large for the local analysis to hold there.
class ChartError : public Error {
public:
    using Error::Error;
};

}  // namespace extremal
