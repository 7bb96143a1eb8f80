#pragma once

#include <stdexcept>
#include <string>

namespace smx {

// Error classes map 1:1 to the CLI's machine-parsable "error:<class>:" prefixes.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension / resolution disagreement between two operands.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Continuous query outside the image domain.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace smx
