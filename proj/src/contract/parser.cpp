#include "ledgerml/contract/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

namespace ledgerml::contract {

std::string_view parse_error_kind_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::LexError: return "LexError";
    case ParseErrorKind::SyntaxError: return "SyntaxError";
    case ParseErrorKind::UnboundIdentifier: return "UnboundIdentifier";
    case ParseErrorKind::DuplicateHandler: return "DuplicateHandler";
  }
  return "?";
}

ParseError::ParseError(ParseErrorKind kind, SourcePos pos, std::string message)
    : std::runtime_error(std::string(parse_error_kind_name(kind)) + " at " + std::to_string(pos.line) + ":" +
                         std::to_string(pos.column) + ": " + message),
      kind_(kind),
      pos_(pos),
      message_(std::move(message)) {}

namespace {

enum class Tok {
  Ident,
  IntLit,
  DblLit,
  DecLit,
  StrLit,
  KwConst,
  KwOn,
  KwLet,
  KwIf,
  KwElse,
  KwWhile,
  KwTrue,
  KwFalse,
  KwNone,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Colon,
  Dot,
  Assign,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  EqEq,
  NotEq,
  Lt,
  Le,
  Gt,
  Ge,
  AndAnd,
  OrOr,
  Bang,
  End,
};

struct Token {
  Tok kind = Tok::End;
  SourcePos pos;
  std::string text;
  Value value;
};

constexpr std::size_t kMaxNesting = 200;

[[noreturn]] void fail(ParseErrorKind kind, SourcePos pos, std::string msg) { throw ParseError(kind, pos, std::move(msg)); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.pos = pos_;
      if (at_end()) {
        t.kind = Tok::End;
        out.push_back(std::move(t));
        return out;
      }
      const char c = peek();
      if (is_ident_start(c)) {
        lex_ident(t);
      } else if (c >= '0' && c <= '9') {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else if (c == '\'' && src_.substr(i_, 3) == "'''") {
        lex_raw_string(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  [[nodiscard]] bool at_end() const { return i_ >= src_.size(); }
  [[nodiscard]] char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }

  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    return c;
  }

  void skip_space() {
    while (!at_end()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  void lex_ident(Token& t) {
    const auto start = i_;
    while (!at_end() && is_ident_char(peek())) advance();
    t.text = std::string(src_.substr(start, i_ - start));
    static const std::map<std::string, Tok, std::less<>> kKeywords = {
        {"const", Tok::KwConst}, {"on", Tok::KwOn},       {"let", Tok::KwLet},     {"if", Tok::KwIf},
        {"else", Tok::KwElse},   {"while", Tok::KwWhile}, {"true", Tok::KwTrue},   {"false", Tok::KwFalse},
        {"none", Tok::KwNone},
    };
    auto it = kKeywords.find(t.text);
    t.kind = it == kKeywords.end() ? Tok::Ident : it->second;
  }

  void lex_number(Token& t) {
    const auto start = i_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    bool is_float = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_float = true;
      advance();
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    bool has_exp = false;
    if (peek() == 'e' || peek() == 'E') {
      std::size_t k = 1;
      if (peek(k) == '+' || peek(k) == '-') ++k;
      if (std::isdigit(static_cast<unsigned char>(peek(k)))) {
        has_exp = true;
        for (std::size_t j = 0; j < k; ++j) advance();
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
    }
    t.text = std::string(src_.substr(start, i_ - start));
    if (peek() == 'm') {
      advance();
      if (has_exp) fail(ParseErrorKind::LexError, t.pos, "decimal literals cannot use an exponent");
      t.kind = Tok::DecLit;
      try {
        t.value = Value::decimal(CoinAmount::parse(t.text));
      } catch (const ArithmeticError& e) {
        fail(ParseErrorKind::LexError, t.pos, e.what());
      }
    } else if (is_float || has_exp) {
      t.kind = Tok::DblLit;
      double d = 0;
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), d);
      if (res.ec != std::errc() || !std::isfinite(d)) fail(ParseErrorKind::LexError, t.pos, "double literal out of range");
      t.value = Value::dbl(d);
    } else {
      t.kind = Tok::IntLit;
      std::uint64_t u = 0;
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), u);
      if (res.ec != std::errc()) fail(ParseErrorKind::LexError, t.pos, "integer literal out of range");
      t.value = Value::integer(static_cast<std::int64_t>(u));
      t.text = std::to_string(u);  // magnitude; range-checked by the parser
    }
    if (is_ident_char(peek())) fail(ParseErrorKind::LexError, pos_, "unexpected character after number");
  }

  void lex_string(Token& t) {
    advance();
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail(ParseErrorKind::LexError, t.pos, "unterminated string literal");
      const char c = advance();
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail(ParseErrorKind::LexError, t.pos, "unterminated string literal");
      const auto esc_pos = pos_;
      const char e = advance();
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case 'x': {
          int v = 0;
          for (int k = 0; k < 2; ++k) {
            const char h = at_end() ? '\0' : advance();
            int d = -1;
            if (h >= '0' && h <= '9') d = h - '0';
            if (h >= 'a' && h <= 'f') d = h - 'a' + 10;
            if (h >= 'A' && h <= 'F') d = h - 'A' + 10;
            if (d < 0) fail(ParseErrorKind::LexError, esc_pos, "bad \\x escape");
            v = v * 16 + d;
          }
          out.push_back(static_cast<char>(v));
          break;
        }
        default: fail(ParseErrorKind::LexError, esc_pos, std::string("unknown escape '\\") + e + "'");
      }
    }
    t.kind = Tok::StrLit;
    t.value = Value::str(std::move(out));
  }

  void lex_raw_string(Token& t) {
    for (int k = 0; k < 3; ++k) advance();
    const auto start = i_;
    while (true) {
      if (at_end()) fail(ParseErrorKind::LexError, t.pos, "unterminated ''' string literal");
      if (src_.substr(i_, 3) == "'''") break;
      advance();
    }
    t.kind = Tok::StrLit;
    t.value = Value::str(std::string(src_.substr(start, i_ - start)));
    for (int k = 0; k < 3; ++k) advance();
  }

  void lex_punct(Token& t) {
    const char c = advance();
    auto two = [&](char next, Tok yes, Tok no) {
      if (peek() == next) {
        advance();
        t.kind = yes;
      } else {
        t.kind = no;
      }
    };
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '{': t.kind = Tok::LBrace; break;
      case '}': t.kind = Tok::RBrace; break;
      case '[': t.kind = Tok::LBracket; break;
      case ']': t.kind = Tok::RBracket; break;
      case ',': t.kind = Tok::Comma; break;
      case ';': t.kind = Tok::Semi; break;
      case ':': t.kind = Tok::Colon; break;
      case '.': t.kind = Tok::Dot; break;
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '%': t.kind = Tok::Percent; break;
      case '=': two('=', Tok::EqEq, Tok::Assign); break;
      case '!': two('=', Tok::NotEq, Tok::Bang); break;
      case '<': two('=', Tok::Le, Tok::Lt); break;
      case '>': two('=', Tok::Ge, Tok::Gt); break;
      case '&':
        if (peek() != '&') fail(ParseErrorKind::LexError, t.pos, "expected '&&'");
        advance();
        t.kind = Tok::AndAnd;
        break;
      case '|':
        if (peek() != '|') fail(ParseErrorKind::LexError, t.pos, "expected '||'");
        advance();
        t.kind = Tok::OrOr;
        break;
      default: {
        const auto byte = static_cast<unsigned char>(c);
        char buf[8];
        std::snprintf(buf, sizeof buf, "0x%02x", byte);
        fail(ParseErrorKind::LexError, t.pos, std::string("unexpected character ") + buf);
      }
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

struct HostFnInfo {
  std::string_view name;
  HostFn fn;
  std::size_t arity;
};

constexpr std::array<HostFnInfo, 16> kHostFns = {{
    {"send", HostFn::Send, 5},
    {"log", HostFn::Log, 1},
    {"get", HostFn::Get, 1},
    {"put", HostFn::Put, 2},
    {"createModel", HostFn::CreateModel, 2},
    {"score", HostFn::Score, 2},
    {"self", HostFn::Self, 0},
    {"balance", HostFn::Balance, 1},
    {"assetBalance", HostFn::AssetBalance, 2},
    {"str", HostFn::Str, 1},
    {"len", HostFn::Len, 1},
    {"dbl", HostFn::Dbl, 1},
    {"int", HostFn::Int, 1},
    {"dec", HostFn::Dec, 1},
    {"utf8", HostFn::Utf8, 1},
    {"unpackF64", HostFn::UnpackF64, 1},
}};

const HostFnInfo* find_host_fn(std::string_view name) {
  for (const auto& f : kHostFns)
    if (f.name == name) return &f;
  return nullptr;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Ast run() {
    while (at(Tok::KwConst)) constant();
    if (!at(Tok::KwOn)) fail(ParseErrorKind::SyntaxError, cur().pos, "expected 'const' or 'on receive'");
    handler();
    if (at(Tok::KwOn)) fail(ParseErrorKind::DuplicateHandler, cur().pos, "contract declares more than one receive handler");
    if (!at(Tok::End)) fail(ParseErrorKind::SyntaxError, cur().pos, "unexpected " + describe(cur()) + " after handler");
    return std::move(ast_);
  }

 private:
  [[nodiscard]] const Token& cur() const { return toks_[i_]; }
  [[nodiscard]] bool at(Tok k) const { return cur().kind == k; }
  const Token& take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    if (t.kind == Tok::Ident) return "identifier '" + t.text + "'";
    if (t.kind == Tok::StrLit) return "string literal";
    if (t.kind == Tok::IntLit || t.kind == Tok::DblLit || t.kind == Tok::DecLit) return "number";
    return "token";
  }

  const Token& expect(Tok k, std::string_view what) {
    if (!at(k)) fail(ParseErrorKind::SyntaxError, cur().pos, "expected " + std::string(what) + ", found " + describe(cur()));
    return take();
  }

  void enter(SourcePos pos) {
    if (++depth_ > kMaxNesting) fail(ParseErrorKind::SyntaxError, pos, "nesting too deep");
  }
  void leave() { --depth_; }

  // ---- declarations -------------------------------------------------------

  void constant() {
    take();
    const auto& name = expect(Tok::Ident, "constant name");
    if (find_host_fn(name.text) || name.text == "empty")
      fail(ParseErrorKind::SyntaxError, name.pos, "'" + name.text + "' is a reserved name");
    for (const auto& c : ast_.constants)
      if (c.name == name.text) fail(ParseErrorKind::SyntaxError, name.pos, "duplicate constant '" + name.text + "'");
    expect(Tok::Assign, "'='");
    Value v = const_literal();
    expect(Tok::Semi, "';'");
    ast_.constants.push_back({name.text, std::move(v)});
  }

  Value const_literal() {
    enter(cur().pos);
    const Token& t = take();
    Value out;
    switch (t.kind) {
      case Tok::IntLit: out = int_value(t, false); break;
      case Tok::DblLit:
      case Tok::DecLit:
      case Tok::StrLit: out = t.value; break;
      case Tok::KwTrue: out = Value::boolean(true); break;
      case Tok::KwFalse: out = Value::boolean(false); break;
      case Tok::KwNone: out = Value(); break;
      case Tok::Ident:
        if (t.text != "empty") fail(ParseErrorKind::SyntaxError, t.pos, "constant initialisers must be literals");
        out = Value::bytes({});
        break;
      case Tok::Minus: {
        const Token& n = take();
        if (n.kind == Tok::IntLit) out = int_value(n, true);
        else if (n.kind == Tok::DblLit) out = Value::dbl(-n.value.as_dbl());
        else if (n.kind == Tok::DecLit) out = Value::decimal(-n.value.as_dec());
        else fail(ParseErrorKind::SyntaxError, n.pos, "expected number after '-'");
        break;
      }
      case Tok::LBracket: {
        List items;
        if (!at(Tok::RBracket)) {
          do items.push_back(const_literal());
          while (at(Tok::Comma) && (take(), true));
        }
        expect(Tok::RBracket, "']'");
        out = Value::list(std::move(items));
        break;
      }
      case Tok::LBrace: {
        Record rec;
        if (!at(Tok::RBrace)) {
          do {
            const auto& key = expect(Tok::Ident, "field name");
            if (rec.find(key.text)) fail(ParseErrorKind::SyntaxError, key.pos, "duplicate field '" + key.text + "'");
            expect(Tok::Colon, "':'");
            rec.keys.push_back(key.text);
            rec.values.push_back(const_literal());
          } while (at(Tok::Comma) && (take(), true));
        }
        expect(Tok::RBrace, "'}'");
        out = Value::record(std::move(rec));
        break;
      }
      default: fail(ParseErrorKind::SyntaxError, t.pos, "constant initialisers must be literals, found " + describe(t));
    }
    leave();
    return out;
  }

  static Value int_value(const Token& t, bool negative) {
    const auto mag = static_cast<std::uint64_t>(t.value.as_int());
    constexpr auto kMax = static_cast<std::uint64_t>(INT64_MAX);
    if (negative) {
      if (mag > kMax + 1) fail(ParseErrorKind::LexError, t.pos, "integer literal out of range");
      return Value::integer(mag == kMax + 1 ? INT64_MIN : -static_cast<std::int64_t>(mag));
    }
    if (mag > kMax) fail(ParseErrorKind::LexError, t.pos, "integer literal out of range");
    return Value::integer(static_cast<std::int64_t>(mag));
  }

  void handler() {
    take();
    const auto& recv = expect(Tok::Ident, "'receive'");
    if (recv.text != "receive") fail(ParseErrorKind::SyntaxError, recv.pos, "expected 'receive' after 'on'");
    expect(Tok::LParen, "'('");
    do {
      const auto& p = expect(Tok::Ident, "parameter name");
      for (const auto& existing : ast_.params)
        if (existing == p.text) fail(ParseErrorKind::SyntaxError, p.pos, "duplicate parameter '" + p.text + "'");
      if (find_host_fn(p.text)) fail(ParseErrorKind::SyntaxError, p.pos, "'" + p.text + "' is a reserved name");
      ast_.params.push_back(p.text);
    } while (at(Tok::Comma) && (take(), true));
    const auto& close = expect(Tok::RParen, "')'");
    if (ast_.params.size() != 5)
      fail(ParseErrorKind::SyntaxError, close.pos,
           "receive takes 5 parameters (sender, action, coins, asset, data), got " + std::to_string(ast_.params.size()));
    ast_.handler = block();
  }

  // ---- statements ---------------------------------------------------------

  std::vector<Stmt> block() {
    expect(Tok::LBrace, "'{'");
    enter(cur().pos);
    scopes_.emplace_back();
    std::vector<Stmt> out;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail(ParseErrorKind::SyntaxError, cur().pos, "expected '}' before end of input");
      out.push_back(statement());
    }
    take();
    scopes_.pop_back();
    leave();
    return out;
  }

  Stmt statement() {
    Stmt s;
    s.pos = cur().pos;
    if (at(Tok::KwLet)) {
      take();
      const auto& name = expect(Tok::Ident, "variable name");
      if (find_host_fn(name.text) || name.text == "empty")
        fail(ParseErrorKind::SyntaxError, name.pos, "'" + name.text + "' is a reserved name");
      if (scopes_.back().count(name.text))
        fail(ParseErrorKind::SyntaxError, name.pos, "'" + name.text + "' is already declared in this block");
      expect(Tok::Assign, "'='");
      s.kind = Stmt::Kind::Let;
      s.name = name.text;
      s.expr = expression();
      expect(Tok::Semi, "';'");
      // Visible only after its own initialiser.
      s.slot = ast_.local_count++;
      scopes_.back()[s.name] = s.slot;
      return s;
    }
    if (at(Tok::KwIf)) {
      take();
      s.kind = Stmt::Kind::If;
      expect(Tok::LParen, "'('");
      s.expr = expression();
      expect(Tok::RParen, "')'");
      s.body = block();
      if (at(Tok::KwElse)) {
        take();
        s.has_else = true;
        if (at(Tok::KwIf)) {
          enter(cur().pos);
          scopes_.emplace_back();
          s.else_body.push_back(statement());
          scopes_.pop_back();
          leave();
        } else {
          s.else_body = block();
        }
      }
      return s;
    }
    if (at(Tok::KwWhile)) {
      take();
      s.kind = Stmt::Kind::While;
      expect(Tok::LParen, "'('");
      s.expr = expression();
      expect(Tok::RParen, "')'");
      s.body = block();
      return s;
    }
    if (at(Tok::Ident) && toks_[i_ + 1].kind == Tok::Assign) {
      const auto& name = take();
      take();
      s.kind = Stmt::Kind::Assign;
      s.name = name.text;
      if (auto slot = lookup_local(name.text)) {
        s.slot = *slot;
      } else if (is_param(name.text) || is_const(name.text)) {
        fail(ParseErrorKind::SyntaxError, name.pos, "cannot assign to '" + name.text + "'; only 'let' variables are mutable");
      } else {
        fail(ParseErrorKind::UnboundIdentifier, name.pos, "'" + name.text + "' is not declared");
      }
      s.expr = expression();
      expect(Tok::Semi, "';'");
      return s;
    }
    s.kind = Stmt::Kind::Expr;
    s.expr = expression();
    expect(Tok::Semi, "';'");
    return s;
  }

  // ---- expressions --------------------------------------------------------

  ExprPtr expression() {
    enter(cur().pos);
    auto e = binary(0);
    leave();
    return e;
  }

  struct BinOp {
    Tok tok;
    Op op;
    int prec;
  };

  static std::optional<BinOp> binop(Tok t) {
    static constexpr std::array<BinOp, 13> kOps = {{
        {Tok::OrOr, Op::Or, 1},
        {Tok::AndAnd, Op::And, 2},
        {Tok::EqEq, Op::Eq, 3},
        {Tok::NotEq, Op::Ne, 3},
        {Tok::Lt, Op::Lt, 4},
        {Tok::Le, Op::Le, 4},
        {Tok::Gt, Op::Gt, 4},
        {Tok::Ge, Op::Ge, 4},
        {Tok::Plus, Op::Add, 5},
        {Tok::Minus, Op::Sub, 5},
        {Tok::Star, Op::Mul, 6},
        {Tok::Slash, Op::Div, 6},
        {Tok::Percent, Op::Mod, 6},
    }};
    for (const auto& b : kOps)
      if (b.tok == t) return b;
    return std::nullopt;
  }

  // Precedence climbing; all binary operators are left-associative.
  ExprPtr binary(int min_prec) {
    auto lhs = unary();
    while (true) {
      auto b = binop(cur().kind);
      if (!b || b->prec < min_prec) break;
      const auto pos = take().pos;
      enter(pos);
      auto rhs = binary(b->prec + 1);
      leave();
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::Binary;
      node->pos = pos;
      node->op = b->op;
      node->kids.push_back(std::move(lhs));
      node->kids.push_back(std::move(rhs));
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (at(Tok::Minus) || at(Tok::Bang)) {
      const auto& t = take();
      enter(t.pos);
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::Unary;
      node->pos = t.pos;
      node->op = t.kind == Tok::Minus ? Op::Neg : Op::Not;
      node->kids.push_back(unary());
      leave();
      return node;
    }
    return postfix(primary());
  }

  ExprPtr postfix(ExprPtr e) {
    int chained = 0;
    while (at(Tok::Dot) || at(Tok::LBracket)) {
      enter(cur().pos);
      ++chained;
      auto node = std::make_unique<Expr>();
      node->pos = take().pos;
      if (toks_[i_ - 1].kind == Tok::Dot) {
        node->kind = Expr::Kind::Field;
        node->name = expect(Tok::Ident, "field name").text;
      } else {
        node->kind = Expr::Kind::Index;
        node->kids.push_back(nullptr);
        node->kids.push_back(expression());
        expect(Tok::RBracket, "']'");
      }
      if (node->kids.empty()) node->kids.push_back(std::move(e));
      else node->kids[0] = std::move(e);
      e = std::move(node);
    }
    for (int k = 0; k < chained; ++k) leave();
    return e;
  }

  ExprPtr literal_node(const Token& t, Value v) {
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::Literal;
    node->pos = t.pos;
    node->literal = std::move(v);
    return node;
  }

  ExprPtr primary() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::IntLit: return literal_node(t, int_value(t, false));
      case Tok::DblLit:
      case Tok::DecLit:
      case Tok::StrLit: return literal_node(t, t.value);
      case Tok::KwTrue: return literal_node(t, Value::boolean(true));
      case Tok::KwFalse: return literal_node(t, Value::boolean(false));
      case Tok::KwNone: return literal_node(t, Value());
      case Tok::LParen: {
        auto e = expression();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBracket: {
        auto node = std::make_unique<Expr>();
        node->kind = Expr::Kind::List;
        node->pos = t.pos;
        if (!at(Tok::RBracket)) {
          do node->kids.push_back(expression());
          while (at(Tok::Comma) && (take(), true));
        }
        expect(Tok::RBracket, "']'");
        return node;
      }
      case Tok::LBrace: {
        auto node = std::make_unique<Expr>();
        node->kind = Expr::Kind::Record;
        node->pos = t.pos;
        if (!at(Tok::RBrace)) {
          do {
            const auto& key = expect(Tok::Ident, "field name");
            for (const auto& k : node->keys)
              if (k == key.text) fail(ParseErrorKind::SyntaxError, key.pos, "duplicate field '" + key.text + "'");
            expect(Tok::Colon, "':'");
            node->keys.push_back(key.text);
            node->kids.push_back(expression());
          } while (at(Tok::Comma) && (take(), true));
        }
        expect(Tok::RBrace, "'}'");
        return node;
      }
      case Tok::Ident: return identifier(t);
      default: fail(ParseErrorKind::SyntaxError, t.pos, "expected an expression, found " + describe(t));
    }
  }

  ExprPtr identifier(const Token& t) {
    auto node = std::make_unique<Expr>();
    node->pos = t.pos;
    node->name = t.text;
    if (at(Tok::LParen)) {
      const auto* fn = find_host_fn(t.text);
      if (fn == nullptr) fail(ParseErrorKind::UnboundIdentifier, t.pos, "unknown function '" + t.text + "'");
      take();
      node->kind = Expr::Kind::Call;
      node->fn = fn->fn;
      if (!at(Tok::RParen)) {
        do node->kids.push_back(expression());
        while (at(Tok::Comma) && (take(), true));
      }
      expect(Tok::RParen, "')'");
      if (node->kids.size() != fn->arity)
        fail(ParseErrorKind::SyntaxError, t.pos,
             std::string(fn->name) + " takes " + std::to_string(fn->arity) + " argument(s), got " +
                 std::to_string(node->kids.size()));
      return node;
    }
    if (auto slot = lookup_local(t.text)) {
      node->kind = Expr::Kind::Local;
      node->slot = *slot;
      return node;
    }
    for (std::size_t i = 0; i < ast_.params.size(); ++i) {
      if (ast_.params[i] == t.text) {
        node->kind = Expr::Kind::Param;
        node->slot = i;
        return node;
      }
    }
    for (std::size_t i = 0; i < ast_.constants.size(); ++i) {
      if (ast_.constants[i].name == t.text) {
        node->kind = Expr::Kind::Const;
        node->slot = i;
        return node;
      }
    }
    if (t.text == "empty") {
      node->kind = Expr::Kind::Literal;
      node->name.clear();
      node->literal = Value::bytes({});
      return node;
    }
    if (find_host_fn(t.text)) fail(ParseErrorKind::SyntaxError, t.pos, "'" + t.text + "' is a function; call it with (...)");
    fail(ParseErrorKind::UnboundIdentifier, t.pos, "'" + t.text + "' is not declared");
  }

  std::optional<std::size_t> lookup_local(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return std::nullopt;
  }
  bool is_param(const std::string& name) const {
    return std::find(ast_.params.begin(), ast_.params.end(), name) != ast_.params.end();
  }
  bool is_const(const std::string& name) const {
    for (const auto& c : ast_.constants)
      if (c.name == name) return true;
    return false;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::size_t depth_ = 0;
  std::vector<std::map<std::string, std::size_t>> scopes_;
  Ast ast_;
};

}  // namespace

Ast parse_contract(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  return parser.run();
}

}  // namespace ledgerml::contract
