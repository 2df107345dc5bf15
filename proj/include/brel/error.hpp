#pragma once

#include <stdexcept>
#include <string>

namespace brel {

// Caller passed a value outside an operation's domain (node id >= n,
// inverted range, infeasible generator spec).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Set operation over operands of different dimensions.
class DimensionMismatch : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// Set operation over structures of different kinds.
class KindMismatch : public DimensionMismatch {
public:
    using DimensionMismatch::DimensionMismatch;
};

// Malformed, truncated or inconsistent serialized input.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfBounds : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// select1(j) with j >= count_ones().
class NoSuchOne : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

} // namespace brel
