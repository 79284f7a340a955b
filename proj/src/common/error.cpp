#include "seeds/error.hpp"

namespace seeds {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingTensor: return "MissingTensor";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotOvercomplete: return "NotOvercomplete";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NoActiveFeatures: return "NoActiveFeatures";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::EncoderUnavailable: return "EncoderUnavailable";
    case ErrorCode::CorruptImage: return "CorruptImage";
    case ErrorCode::DecoderUnavailable: return "DecoderUnavailable";
    case ErrorCode::GeneratorUnavailable: return "GeneratorUnavailable";
    case ErrorCode::BadCanvas: return "BadCanvas";
    case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ExpanderUnavailable: return "ExpanderUnavailable";
    case ErrorCode::SimilarityUnavailable: return "SimilarityUnavailable";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::CorruptLine: return "CorruptLine";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MissingLength: return "MissingLength";
    case ErrorCode::JobNotDone: return "JobNotDone";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::StoreUnwritable: return "StoreUnwritable";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace seeds
