#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seeds {

// Every failure surfaced by the library carries one of these codes so that
// callers (CLI, HTTP layer, tests) can branch on the kind of error without
// parsing messages.
enum class ErrorCode {
  // sae-core
  MissingTensor,
  ShapeMismatch,
  NotOvercomplete,
  InvalidModel,
  DimMismatch,
  NoActiveFeatures,
  EmptyData,
  // decomposer
  DegenerateInput,
  ZeroDirection,
  // model-bridge
  EncoderUnavailable,
  CorruptImage,
  DecoderUnavailable,
  GeneratorUnavailable,
  BadCanvas,
  JudgeUnavailable,
  RateLimited,
  ExpanderUnavailable,
  SimilarityUnavailable,
  // manifests / config
  SchemaVersionMismatch,
  CorruptLine,
  UnknownField,
  // tuner
  EmptyDataset,
  BackendUnavailable,
  // evalkit
  MissingLength,
  // gateway / composer
  JobNotDone,
  IndexOutOfRange,
  NotFound,
  PortInUse,
  StoreUnwritable,
  // generic
  PreconditionViolated,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace seeds
