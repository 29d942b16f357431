#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fishid {

enum class ErrorKind {
  UnsupportedFormat,
  TruncatedData,
  MalformedRow,
  InconsistentHierarchy,
  EmptyManifest,
  ImageTooSmall,
  EmptyForeground,
  InvalidArgument,
  InconsistentInputs,
  BadArchitecture,
  DimensionMismatch,
  EmptyTrainingSet,
  NonFiniteError,
  EmptySet,
  RaggedRows,
  UnknownClass,
  CanvasTooSmall,
  IoFailure,
  ClassMissing,
  EmptyTestSet,
  VersionMismatch,
  CorruptModel,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure carries the pipeline stage that raised it ("decode",
// "preprocess", "segment", ...) so callers can attribute it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace fishid
