#include "ledgerml/pfa/error.hpp"

namespace ledgerml::pfa {

std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::JsonError: return "JsonError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::UnknownBuiltin: return "UnknownBuiltin";
    case ErrorKind::UnboundSymbol: return "UnboundSymbol";
    case ErrorKind::InputSchemaMismatch: return "InputSchemaMismatch";
    case ErrorKind::NumericFault: return "NumericFault";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownActivation: return "UnknownActivation";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EvalBudgetExceeded: return "EvalBudgetExceeded";
  }
  return "?";
}

namespace {
std::string compose(ErrorKind kind, const std::string& detail, const std::string& path) {
  std::string out(error_kind_name(kind));
  if (!path.empty()) out += " at " + path;
  if (!detail.empty()) out += ": " + detail;
  return out;
}
}  // namespace

PfaError::PfaError(ErrorKind kind, std::string detail, std::string path)
    : std::runtime_error(compose(kind, detail, path)), kind_(kind), detail_(std::move(detail)), path_(std::move(path)) {}

}  // namespace ledgerml::pfa
