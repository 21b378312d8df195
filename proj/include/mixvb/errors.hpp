#pragma once

#include <stdexcept>
#include <string>

namespace mixvb {

/// Malformed external input: files, JSON documents, CLI-level values.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension mismatch between containers that must agree (K, V, n).
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Incompatible combination of family, prior, and factor kinds.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Violated numerical invariant detected at run time (degenerate rows,
/// non-finite intermediates, broken monotonicity under validation).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixvb
