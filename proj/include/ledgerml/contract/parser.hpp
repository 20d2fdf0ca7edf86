#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "ledgerml/contract/ast.hpp"

namespace ledgerml::contract {

enum class ParseErrorKind { LexError, SyntaxError, UnboundIdentifier, DuplicateHandler };

std::string_view parse_error_kind_name(ParseErrorKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, SourcePos pos, std::string message);

  [[nodiscard]] ParseErrorKind kind() const { return kind_; }
  [[nodiscard]] SourcePos pos() const { return pos_; }
  [[nodiscard]] const std::string& message() const { return message_; }

 private:
  ParseErrorKind kind_;
  SourcePos pos_;
  std::string message_;
};

/// Grammar:
///   contract := { "const" NAME "=" literal ";" } onrecv
///   onrecv   := "on" "receive" "(" NAME {"," NAME} ")" block
///   stmt     := "let" NAME "=" expr ";" | NAME "=" expr ";"
///             | "if" "(" expr ")" block ["else" (block | if-stmt)]
///             | "while" "(" expr ")" block | expr ";"
/// with C-like operator precedence and `//` line comments. The handler takes
/// exactly five parameters: sender, action, coins, asset, data.
Ast parse_contract(std::string_view source);

}  // namespace ledgerml::contract
