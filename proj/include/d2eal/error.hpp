#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace d2eal {

enum class ErrorCode {
    NonFiniteInput,
    InvalidCovariance,
    InvalidProbability,
    InvalidArgument,
    ConfigError,
    NumericalFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the simulation loop; remembers where the run blew up.
class NumericalFailure : public Error {
public:
    NumericalFailure(int step, const std::string& what)
        : Error(ErrorCode::NumericalFailure, "step " + std::to_string(step) + ": " + what),
          step_(step) {}

    [[nodiscard]] int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace d2eal
