#include "rkhs/error.hpp"

namespace rkhs {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NotHurwitz: return "NotHurwitz";
        case ErrorCode::NotSpd: return "NotSpd";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::DuplicateCenters: return "DuplicateCenters";
        case ErrorCode::EmptyResult: return "EmptyResult";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::NotSimple: return "NotSimple";
        case ErrorCode::BadScales: return "BadScales";
        case ErrorCode::GeneratorOutsideHull: return "GeneratorOutsideHull";
        case ErrorCode::DuplicateGenerators: return "DuplicateGenerators";
        case ErrorCode::EmptyIntersection: return "EmptyIntersection";
        case ErrorCode::ScheduleExhausted: return "ScheduleExhausted";
        case ErrorCode::UnstableStep: return "UnstableStep";
        case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
        case ErrorCode::WindowTooLong: return "WindowTooLong";
        case ErrorCode::SingleCenter: return "SingleCenter";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace rkhs
