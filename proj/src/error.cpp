#include "neraug/error.hpp"

namespace neraug {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::InvalidBioTransition: return "InvalidBioTransition";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::UnbalancedBrackets: return "UnbalancedBrackets";
    case ErrorCode::MissingSeparator: return "MissingSeparator";
    case ErrorCode::UnknownDisplayName: return "UnknownDisplayName";
    case ErrorCode::EmptyEntity: return "EmptyEntity";
    case ErrorCode::NoEntity: return "NoEntity";
    case ErrorCode::NoContext: return "NoContext";
    case ErrorCode::SameType: return "SameType";
    case ErrorCode::OverlapExhausted: return "OverlapExhausted";
    case ErrorCode::InvalidKM: return "InvalidKM";
    case ErrorCode::SingletonSchema: return "SingletonSchema";
    case ErrorCode::MissingEmbeddings: return "MissingEmbeddings";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::UnparseableGeneration: return "UnparseableGeneration";
    case ErrorCode::SlotMismatch: return "SlotMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingParent: return "MissingParent";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace neraug
