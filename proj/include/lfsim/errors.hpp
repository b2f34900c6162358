#pragma once

#include <stdexcept>
#include <string>

namespace lfsim {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct EncodingError : std::runtime_error {
    explicit EncodingError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a postselection has (numerically) zero probability mass,
// or when an OAA step cannot be completed.
struct ProjectionError : std::runtime_error {
    explicit ProjectionError(const std::string& what) : std::runtime_error(what) {}
};

// m_g = 0 with a nonzero zero-momentum charge mode has no Poisson solution.
struct SingularModeError : std::runtime_error {
    explicit SingularModeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lfsim
