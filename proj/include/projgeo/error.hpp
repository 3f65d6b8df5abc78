#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projgeo {

enum class ErrorCode {
    NotHermitian,
    NoConvergence,
    SingularInput,
    NotSkew,
    NotUnitary,
    LogAtMinusOne,
    NotAProjection,
    BadRank,
    InconsistentDims,
    DimMismatch,
    NoGeodesic,
    BadIndex,
    BadUnitarySize,
    BlockDimMismatch,
    NotSelfadjoint,
    NoSpectralGap,
    NotCodiagonal,
    NormTooLarge,
    TooManyBlocks,
    NotRepresentable,
    BadTolerance,
    BadInput,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularInput: return "SingularInput";
    case ErrorCode::NotSkew: return "NotSkew";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::LogAtMinusOne: return "LogAtMinusOne";
    case ErrorCode::NotAProjection: return "NotAProjection";
    case ErrorCode::BadRank: return "BadRank";
    case ErrorCode::InconsistentDims: return "InconsistentDims";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NoGeodesic: return "NoGeodesic";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::BadUnitarySize: return "BadUnitarySize";
    case ErrorCode::BlockDimMismatch: return "BlockDimMismatch";
    case ErrorCode::NotSelfadjoint: return "NotSelfadjoint";
    case ErrorCode::NoSpectralGap: return "NoSpectralGap";
    case ErrorCode::NotCodiagonal: return "NotCodiagonal";
    case ErrorCode::NormTooLarge: return "NormTooLarge";
    case ErrorCode::TooManyBlocks: return "TooManyBlocks";
    case ErrorCode::NotRepresentable: return "NotRepresentable";
    case ErrorCode::BadTolerance: return "BadTolerance";
    case ErrorCode::BadInput: return "BadInput";
    }
    return "Unknown";
}

/// Every failure in the library is reported through this type; `code()` is
/// stable, `what()` carries the offending quantity.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace projgeo
