#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ledgerml::pfa {

enum class ErrorKind {
  JsonError,
  SchemaError,
  TypeError,
  UnknownBuiltin,
  UnboundSymbol,
  InputSchemaMismatch,
  NumericFault,
  DimensionMismatch,
  UnknownActivation,
  IndexOutOfRange,
  EvalBudgetExceeded,
};

std::string_view error_kind_name(ErrorKind k);

/// Every failure raised by the scoring engine. `path` is a JSON-pointer-like
/// location for document errors and empty for evaluation errors.
class PfaError : public std::runtime_error {
 public:
  PfaError(ErrorKind kind, std::string detail, std::string path = {});

  [[nodiscard]] ErrorKind kind() const { return kind_; }
  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
  std::string path_;
};

}  // namespace ledgerml::pfa
