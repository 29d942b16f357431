#include "fishid/error.hpp"

namespace fishid {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::TruncatedData: return "TruncatedData";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::InconsistentHierarchy: return "InconsistentHierarchy";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::EmptyForeground: return "EmptyForeground";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InconsistentInputs: return "InconsistentInputs";
    case ErrorKind::BadArchitecture: return "BadArchitecture";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::NonFiniteError: return "NonFiniteError";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::UnknownClass: return "UnknownClass";
    case ErrorKind::CanvasTooSmall: return "CanvasTooSmall";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::ClassMissing: return "ClassMissing";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptModel: return "CorruptModel";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string stage, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " [" + stage + "]: " + detail),
      kind_(kind),
      stage_(std::move(stage)) {}

}  // namespace fishid
