#include "causal_audit/errors.hpp"

namespace causal_audit {

SyntaxError::SyntaxError(const std::string& message, std::size_t line, std::size_t column)
    : Error("SyntaxError",
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace causal_audit
