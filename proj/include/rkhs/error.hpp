#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rkhs {

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    NotHurwitz,
    NotSpd,
    NotSymmetric,
    NonFiniteState,
    InvalidParameter,
    IllConditioned,
    DuplicateCenters,
    EmptyResult,
    EmptySet,
    Degenerate,
    NotSimple,
    BadScales,
    GeneratorOutsideHull,
    DuplicateGenerators,
    EmptyIntersection,
    ScheduleExhausted,
    UnstableStep,
    EpsilonTooLarge,
    WindowTooLong,
    SingleCenter,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; every library failure is one of these.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) { fail(code, message); }
}

}  // namespace rkhs
