#ifndef PQRLAB_ERRORS_HPP
#define PQRLAB_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace pqrlab {

/// Invalid configuration, parameters or domain input. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (non-convergence, breakdown). CLI exit code 2.
class NumericsError : public std::runtime_error {
public:
    explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
    NumericsError(const std::string& msg, std::vector<double> residuals)
        : std::runtime_error(msg), attained_residuals(std::move(residuals)) {}

    std::vector<double> attained_residuals;
};

/// Filesystem / stream failure. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pqrlab

#endif
