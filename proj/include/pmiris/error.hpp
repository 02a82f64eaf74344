#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pmiris {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedFormat,
    CorruptFile,
    DimensionTooSmall,
    DimensionMismatch,
    SchemaMismatch,
    MissingField,
    BadMagic,
    VersionUnsupported,
    LengthMismatch,
    NoBoundaryFound,
    DegenerateGeometry,
    OutOfFrame,
    FilterLargerThanGrid,
    GridTooNarrow,
    KernelLargerThanGrid,
    BadKernelFile,
    NonZeroMeanKernel,
    IncompatibleTemplates,
    InsufficientOverlap,
    EmptyUsableArea,
    MetricAbsent,
    EmptyInput,
    DegenerateVariance,
    CannotBalance,
    SampleTooSmall,
    DegenerateInput,
    DuplicateSampleId,
    NotFound,
    StorageFailure,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library. The code is what callers branch
/// on (FTM accounting, HTTP status, CLI exit code).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Errors that the pairwise pipeline turns into a failure-to-match instead of propagating.
bool is_pipeline_failure(ErrorCode code);

}  // namespace pmiris
