#pragma once

#include <stdexcept>
#include <string>

namespace upfl {

/// Invalid user-supplied configuration (bad dimensions, unknown modes, ...).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violation of an API contract (shape mismatch, empty input, ...).
class ContractError : public std::logic_error {
public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// Malformed input file (bad syntax); carries a 1-based line number.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, long line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// Well-formed file whose content violates the schema (label out of range,
/// inconsistent dimensions across records, ...).
class SchemaError : public std::runtime_error {
public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A per-device train/test split cannot be performed.
class SplitError : public std::runtime_error {
public:
  explicit SplitError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A local solve produced non-finite values.
class DivergenceError : public std::runtime_error {
public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Evaluation requested on an empty split.
class EvalError : public std::runtime_error {
public:
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Accountant parameters outside the valid domain of a closed form.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A diagnostic cannot be computed at the requested point.
class DiagnosticError : public std::runtime_error {
public:
  explicit DiagnosticError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The convergence bound does not apply (C1 <= 0).
class BoundInapplicableError : public std::runtime_error {
public:
  explicit BoundInapplicableError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace upfl
