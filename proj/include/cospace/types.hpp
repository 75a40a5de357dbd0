#pragma once

#include <stdexcept>
#include <string>

namespace cospace {

// Opaque sample identifier. Ordering (lexicographic) is the tie-break
// order used everywhere a deterministic choice between samples is needed.
using SampleId = std::string;

// Bad input data or a numeric failure at run time. Maps to exit code 1.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (bad flag value, missing file, malformed config).
// Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cospace
