#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace paretonas {

/// Input that violates a type invariant (gene range, block not in a menu...).
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A tensor dimension became non-positive while propagating shapes.
class ShapeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numeric argument outside the operation's precondition.
class ArgumentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Operation invoked on an object in the wrong state (e.g. empty archive).
class StateError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Base for failures reported by an accuracy evaluator. Retryable by the caller.
class EvaluatorError : public std::runtime_error {
  public:
    explicit EvaluatorError(const std::string& what, std::optional<std::int64_t> request_id = std::nullopt)
        : std::runtime_error(what), request_id_(request_id) {}

    std::optional<std::int64_t> request_id() const noexcept { return request_id_; }

  private:
    std::optional<std::int64_t> request_id_;
};

class EvaluatorTimeout : public EvaluatorError {
  public:
    using EvaluatorError::EvaluatorError;
};

/// Worker wrote something that is not a valid response line.
class ProtocolError : public EvaluatorError {
  public:
    using EvaluatorError::EvaluatorError;
};

class AccuracyRangeError : public ProtocolError {
  public:
    using ProtocolError::ProtocolError;
};

class WorkerExited : public EvaluatorError {
  public:
    using EvaluatorError::EvaluatorError;
};

/// Worker answered `{"id":N,"error":...}` for a request.
class WorkerReportedError : public EvaluatorError {
  public:
    using EvaluatorError::EvaluatorError;
};

} // namespace paretonas
