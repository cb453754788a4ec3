#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace enose {

enum class ErrorCode {
  // dataset
  EmptyRun,
  MalformedCell,
  RaggedRow,
  SchemaMismatch,
  EmptyInput,
  InvalidFraction,
  ClassTooSmall,
  TooFewPerClass,
  BadK,
  LabelConflict,
  // preprocess / reduce
  EmptyMatrix,
  MissingColumn,
  UnfittedReducer,
  BadComponentCount,
  DegenerateInput,
  DimensionMismatch,
  SingleClass,
  // classifiers
  EmptyNode,
  ShapeMismatch,
  DegenerateLabels,
  // neural
  BadSpec,
  NonFiniteLoss,
  UnknownVariant,
  // ensemble
  ClassTableMismatch,
  EmptyEnsemble,
  // evaluate
  EmptyGrid,
  LabelOutOfRange,
  BadSizes,
  BadParameter,
  // io / config
  Io,
  Config,
  Format,
  // anything not raised by the library itself
  Internal,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Cell-level parse failure; row and col are 1-based data-row and column.
class MalformedCellError : public Error {
 public:
  MalformedCellError(std::size_t row, std::size_t col, const std::string& token)
      : Error(ErrorCode::MalformedCell, "row " + std::to_string(row) + ", col " +
                                            std::to_string(col) + ": '" + token + "'"),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class RaggedRowError : public Error {
 public:
  explicit RaggedRowError(std::size_t row)
      : Error(ErrorCode::RaggedRow, "row " + std::to_string(row) + " has the wrong cell count"),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace enose
