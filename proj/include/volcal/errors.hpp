#pragma once

#include <stdexcept>
#include <string>

namespace volcal {

/// Invalid argument or violated type invariant.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Malformed input file contents; message names the offending row or quote.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown: quadrature non-convergence, nonfinite intermediates.
class NumericFailure : public std::runtime_error {
public:
    explicit NumericFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// Every calibration start failed to produce a finite loss.
class CalibrationFailure : public std::runtime_error {
public:
    explicit CalibrationFailure(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace volcal
