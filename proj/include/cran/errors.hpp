#pragma once

#include <stdexcept>
#include <string>

namespace cran {

/// Raised when a numerical routine receives an argument outside its domain
/// (indefinite matrix where positive definite is required, failed
/// factorization, unattainable budget, ...).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a combinatorial routine would exceed its hard size cap.
struct SizeError : std::invalid_argument {
    explicit SizeError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Raised on malformed experiment configuration (unknown scheme, bad axis).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cran
