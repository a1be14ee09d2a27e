#include "helio/error.hpp"

namespace helio {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::TruncatedFile: return "TruncatedFile";
        case ErrorKind::MalformedCard: return "MalformedCard";
        case ErrorKind::UnsupportedBitpix: return "UnsupportedBitpix";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::BadArgs: return "BadArgs";
        case ErrorKind::BadMaxDn: return "BadMaxDn";
        case ErrorKind::NonDivisibleFactor: return "NonDivisibleFactor";
        case ErrorKind::PatchTooLarge: return "PatchTooLarge";
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::CorruptLength: return "CorruptLength";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::ExtractorMismatch: return "ExtractorMismatch";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::NotPsd: return "NotPsd";
        case ErrorKind::Numerics: return "Numerics";
        case ErrorKind::SubsetTooLarge: return "SubsetTooLarge";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::TooFewRuns: return "TooFewRuns";
        case ErrorKind::BadComponent: return "BadComponent";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::Usage: return "Usage";
    }
    return "Unknown";
}

ErrorClass classify(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Usage:
        case ErrorKind::BadArgs:
        case ErrorKind::KTooLarge:
        case ErrorKind::SubsetTooLarge:
        case ErrorKind::PatchTooLarge:
        case ErrorKind::BadComponent:
        case ErrorKind::BadMaxDn:
        case ErrorKind::NonDivisibleFactor:
            return ErrorClass::Usage;
        case ErrorKind::NotSymmetric:
        case ErrorKind::NotPsd:
        case ErrorKind::Numerics:
            return ErrorClass::Numerics;
        default:
            return ErrorClass::Data;
    }
}

}  // namespace helio
