#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace causal_audit {

// Root of every error the library raises. `kind()` is a stable identifier
// used in reports and by the CLI to pick exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CAUSAL_AUDIT_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

// graph-core
CAUSAL_AUDIT_DEFINE_ERROR(CycleError)
CAUSAL_AUDIT_DEFINE_ERROR(UnknownNodeError)
CAUSAL_AUDIT_DEFINE_ERROR(DuplicateEdgeError)
CAUSAL_AUDIT_DEFINE_ERROR(OverlapError)
CAUSAL_AUDIT_DEFINE_ERROR(PathExplosionError)

// scm-engine
CAUSAL_AUDIT_DEFINE_ERROR(BudgetExceededError)
CAUSAL_AUDIT_DEFINE_ERROR(DomainError)
CAUSAL_AUDIT_DEFINE_ERROR(UnsupportedModelError)
CAUSAL_AUDIT_DEFINE_ERROR(InvalidPathSelectionError)
CAUSAL_AUDIT_DEFINE_ERROR(ImpossibleObservationError)
CAUSAL_AUDIT_DEFINE_ERROR(ModelError)

// estimators
CAUSAL_AUDIT_DEFINE_ERROR(EmptyStratumError)
CAUSAL_AUDIT_DEFINE_ERROR(NotIdentifiableError)
CAUSAL_AUDIT_DEFINE_ERROR(PositivityError)
CAUSAL_AUDIT_DEFINE_ERROR(TooManyDegenerateReplicatesError)

// assumption-checks
CAUSAL_AUDIT_DEFINE_ERROR(MixedTypeError)
CAUSAL_AUDIT_DEFINE_ERROR(InsufficientDataError)
CAUSAL_AUDIT_DEFINE_ERROR(UnknownColumnError)
CAUSAL_AUDIT_DEFINE_ERROR(ColumnGraphMismatchError)
CAUSAL_AUDIT_DEFINE_ERROR(NoNumericChildError)

// scenarios
CAUSAL_AUDIT_DEFINE_ERROR(ParameterRangeError)

// audit-cli
CAUSAL_AUDIT_DEFINE_ERROR(SemanticError)
CAUSAL_AUDIT_DEFINE_ERROR(SchemaMismatchError)
CAUSAL_AUDIT_DEFINE_ERROR(EmptyFileError)
CAUSAL_AUDIT_DEFINE_ERROR(ConfigError)

#undef CAUSAL_AUDIT_DEFINE_ERROR

// Parse failure in the graph-spec DSL, with a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace causal_audit
