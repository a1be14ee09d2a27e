#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace helio {

enum class ErrorKind {
    // fits
    TruncatedFile,
    MalformedCard,
    UnsupportedBitpix,
    // shared
    InvariantViolation,
    IoFailure,
    EmptyInput,
    BadArgs,
    // imageprep
    BadMaxDn,
    NonDivisibleFactor,
    PatchTooLarge,
    // featstore
    BadMagic,
    CorruptLength,
    NonFiniteValue,
    ExtractorMismatch,
    DimMismatch,
    // metrics
    TooFewSamples,
    NotSymmetric,
    NotPsd,
    Numerics,
    SubsetTooLarge,
    KTooLarge,
    // statlab
    LengthMismatch,
    DegenerateInput,
    TooFewRuns,
    // latentlab
    BadComponent,
    DegenerateData,
    // cli
    Usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Coarse class of an error, used for process exit codes.
enum class ErrorClass { Usage, Data, Numerics };

ErrorClass classify(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace helio
