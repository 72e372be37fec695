#pragma once

#include <stdexcept>
#include <string>

namespace relprop {

// Contract violations (bad shapes, bad config values) throw std::invalid_argument.
// The types below carry the error classes the CLI maps to distinct exit codes.

/// Filesystem / stream failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line where parsing failed (0 if n/a).
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t line_no = 0)
        : std::runtime_error(line_no ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
    std::size_t line;
};

/// A request that the available data cannot satisfy (e.g. not enough negatives).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A bounding box collapsed to zero area under coordinate scaling.
struct DegenerateBoxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace relprop
