#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace alsel {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What a validation pass found. Validation stops at the first violated
/// invariant, so an exception always describes exactly one issue.
enum class ValidationIssue {
  EmptyShape,           // n_samples or a dimension is zero
  NonFinite,            // NaN or Inf encountered
  ValueOutOfRange,      // probability outside [0, 1], or negative variance
  RowSumViolation,      // per-(sample, augmentation) probabilities do not sum to 1
  TooFewAugmentations,  // K below the required minimum
  IndexOutOfRange,      // index >= n_samples
  DuplicateIndex,
  ShapeMismatch,        // two inputs disagree on n_samples / dim
  BudgetTooLarge,
  MissingInput,         // strategy invoked without a required input
  InvalidArgument,      // bad temperature, empty selection, ...
};

const char* to_string(ValidationIssue issue);

/// Error with a machine-checkable issue kind and up to three coordinates
/// (sample, augmentation/column, class); unused slots are -1.
class ValidationError : public Error {
 public:
  ValidationError(ValidationIssue issue, const std::string& message,
                  std::array<std::int64_t, 3> coords = {-1, -1, -1})
      : Error(message), issue_(issue), coords_(coords) {}

  ValidationIssue issue() const { return issue_; }
  const std::array<std::int64_t, 3>& coords() const { return coords_; }

 private:
  ValidationIssue issue_;
  std::array<std::int64_t, 3> coords_;
};

/// File-format and parsing errors raised by the io module.
class IoError : public Error {
 public:
  enum class Kind {
    OpenFailed,
    WriteFailed,
    BadMagic,
    UnsupportedVersion,
    BadRank,
    BadDtype,
    Truncated,
    RaggedRow,
    BadToken,
    DuplicateIndex,
    BadConfig,
  };

  IoError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace alsel
