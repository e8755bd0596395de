#ifndef AAGAN_ERRORS_HPP
#define AAGAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aagan {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor dimension disagreements. Messages name both offending shapes.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Degenerate numerical input (zero-norm vector, rank-deficient data).
struct DegenerateError : Error {
    explicit DegenerateError(const std::string& msg) : Error(msg) {}
};

// Non-finite value where training cannot continue.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Malformed files: bad magic, truncation, version mismatch.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration values.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Observed/future split cannot be satisfied by the available rows.
struct ProtocolError : Error {
    explicit ProtocolError(const std::string& msg) : Error(msg) {}
};

} // namespace aagan

#endif
