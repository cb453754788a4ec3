#include "enose/error.hpp"

namespace enose {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyRun: return "EmptyRun";
    case ErrorCode::MalformedCell: return "MalformedCell";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::LabelConflict: return "LabelConflict";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnfittedReducer: return "UnfittedReducer";
    case ErrorCode::BadComponentCount: return "BadComponentCount";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyNode: return "EmptyNode";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::UnknownVariant: return "UnknownVariant";
    case ErrorCode::ClassTableMismatch: return "ClassTableMismatch";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::BadSizes: return "BadSizes";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::Internal: return "InternalError";
  }
  return "Unknown";
}

}  // namespace enose
