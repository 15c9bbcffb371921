#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace neraug {

enum class ErrorCode {
  // corpus
  UnknownTag,
  MalformedLine,
  InvalidBioTransition,
  InvalidSchema,
  // linearizer
  UnknownType,
  UnbalancedBrackets,
  MissingSeparator,
  UnknownDisplayName,
  EmptyEntity,
  // mask ops / strategies
  NoEntity,
  NoContext,
  SameType,
  OverlapExhausted,
  InvalidKM,
  SingletonSchema,
  MissingEmbeddings,
  // gateway
  BackendUnavailable,
  UnparseableGeneration,
  SlotMismatch,
  // mixup
  DimensionMismatch,
  MissingParent,
  // pipeline
  IdMismatch,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Value-or-error carrier for batch APIs that must not throw per item.
template <typename T>
class Result {
 public:
  Result(T value) : data_(std::move(value)) {}
  Result(Error error) : data_(std::move(error)) {}

  bool ok() const noexcept { return std::holds_alternative<T>(data_); }
  explicit operator bool() const noexcept { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::get<Error>(data_);
    return std::get<T>(data_);
  }
  T&& value() && {
    if (!ok()) throw std::get<Error>(data_);
    return std::get<T>(std::move(data_));
  }
  const Error& error() const { return std::get<Error>(data_); }

 private:
  std::variant<T, Error> data_;
};

}  // namespace neraug
