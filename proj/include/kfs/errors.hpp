#pragma once

#include <stdexcept>
#include <string>

namespace kfs {

// Tensor shape or dimension violation.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric guard tripped: near-zero divisor, non-finite loss or gradient.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration: bad dimensions, unknown keys, out-of-range values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data: unparseable cells, irregular timestamps, short splits.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable, corrupt, or incompatible checkpoint file.
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kfs
