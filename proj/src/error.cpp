#include "pmiris/error.hpp"

namespace pmiris {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::VersionUnsupported: return "VersionUnsupported";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NoBoundaryFound: return "NoBoundaryFound";
        case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorCode::OutOfFrame: return "OutOfFrame";
        case ErrorCode::FilterLargerThanGrid: return "FilterLargerThanGrid";
        case ErrorCode::GridTooNarrow: return "GridTooNarrow";
        case ErrorCode::KernelLargerThanGrid: return "KernelLargerThanGrid";
        case ErrorCode::BadKernelFile: return "BadKernelFile";
        case ErrorCode::NonZeroMeanKernel: return "NonZeroMeanKernel";
        case ErrorCode::IncompatibleTemplates: return "IncompatibleTemplates";
        case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorCode::EmptyUsableArea: return "EmptyUsableArea";
        case ErrorCode::MetricAbsent: return "MetricAbsent";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::CannotBalance: return "CannotBalance";
        case ErrorCode::SampleTooSmall: return "SampleTooSmall";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::StorageFailure: return "StorageFailure";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

bool is_pipeline_failure(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoBoundaryFound:
        case ErrorCode::DegenerateGeometry:
        case ErrorCode::OutOfFrame:
        case ErrorCode::InsufficientOverlap:
        case ErrorCode::FilterLargerThanGrid:
        case ErrorCode::GridTooNarrow:
        case ErrorCode::KernelLargerThanGrid:
            return true;
        default:
            return false;
    }
}

}  // namespace pmiris
