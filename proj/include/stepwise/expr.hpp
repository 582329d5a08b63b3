#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stepwise/error.hpp"
#include "stepwise/numeric.hpp"

namespace stepwise {

/// Parser mode. In fraction mode `(a/b)` with integer parts is a rational
/// literal; in standard mode `/` is always division.
enum class Mode { Standard, Fraction };

// ---------------------------------------------------------------------------
// Lexing

enum class TokenKind {
  DigitRun,
  Dot,
  Percent,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Equals,
};

struct Token {
  TokenKind kind;
  std::string_view text;
  std::size_t offset;
};

/// Splits `src` into tokens. Concatenating the token texts reproduces `src`
/// exactly; any character outside the alphabet is a SyntaxError.
inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  out.reserve(src.size());
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c >= '0' && c <= '9') {
      std::size_t j = i;
      while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
      out.push_back({TokenKind::DigitRun, src.substr(i, j - i), i});
      i = j;
      continue;
    }
    TokenKind kind;
    switch (c) {
      case '.': kind = TokenKind::Dot; break;
      case '%': kind = TokenKind::Percent; break;
      case '+': kind = TokenKind::Plus; break;
      case '-': kind = TokenKind::Minus; break;
      case '*': kind = TokenKind::Star; break;
      case '/': kind = TokenKind::Slash; break;
      case '^': kind = TokenKind::Caret; break;
      case '(': kind = TokenKind::LParen; break;
      case ')': kind = TokenKind::RParen; break;
      case '[': kind = TokenKind::LBracket; break;
      case ']': kind = TokenKind::RBracket; break;
      case '=': kind = TokenKind::Equals; break;
      default:
        throw Error(ErrorCode::Syntax,
                    "unexpected character at offset " + std::to_string(i), i);
    }
    out.push_back({kind, src.substr(i, 1), i});
    ++i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Syntax tree

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Bracket { Paren, Square };

inline char op_char(BinOp op) {
  switch (op) {
    case BinOp::Add: return '+';
    case BinOp::Sub: return '-';
    case BinOp::Mul: return '*';
    case BinOp::Div: return '/';
    case BinOp::Pow: return '^';
  }
  return '?';
}

/// 0 for + -, 1 for * /, 2 for ^.
inline int precedence(BinOp op) {
  switch (op) {
    case BinOp::Add:
    case BinOp::Sub: return 0;
    case BinOp::Mul:
    case BinOp::Div: return 1;
    case BinOp::Pow: return 2;
  }
  return 0;
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Numeric literal (integer or decimal, maybe with %). `text` is the surface spelling and is
/// what the printer emits.
struct NumberLit {
  NumberValue value;
  std::string text;
  bool percent = false;
};

/// Rational literal (fraction mode only). Bare literals print as `n/d` when
/// they are the whole expression; everywhere else they print as `(n/d)`.
/// `computed` marks literals produced by arithmetic, which are candidates for
/// reduction.
struct FractionLit {
  WideInt num;
  WideInt den;
  bool bare = false;
  bool computed = false;
};

struct Unary {
  char sign;  // '+' or '-'
  ExprPtr operand;
  bool marker = false;  // explicit '+' written by sign normalization
};

struct Binary {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Group {
  Bracket kind;
  ExprPtr inner;
};

struct Expr {
  std::variant<NumberLit, FractionLit, Unary, Binary, Group> node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
};

template <class T>
ExprPtr make_expr(T node) {
  return std::make_shared<const Expr>(Expr{std::move(node)});
}

inline ExprPtr make_number(NumberValue v) {
  std::string text = render(v);
  return make_expr(NumberLit{std::move(v), std::move(text), false});
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline void print_into(const Expr& e, bool is_root, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          out += n.text;
        } else if constexpr (std::is_same_v<T, FractionLit>) {
          const bool parens = !(n.bare && is_root);
          if (parens) out += '(';
          out += n.num.to_string();
          out += '/';
          out += n.den.to_string();
          if (parens) out += ')';
        } else if constexpr (std::is_same_v<T, Unary>) {
          out += n.sign;
          print_into(*n.operand, false, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          print_into(*n.lhs, false, out);
          out += op_char(n.op);
          print_into(*n.rhs, false, out);
        } else {
          out += n.kind == Bracket::Paren ? '(' : '[';
          print_into(*n.inner, false, out);
          out += n.kind == Bracket::Paren ? ')' : ']';
        }
      },
      e.node);
}

}  // namespace detail

/// Prints the tree exactly as structured; no parentheses are added or removed.
inline std::string print(const Expr& e) {
  std::string out;
  detail::print_into(e, true, out);
  return out;
}
inline std::string print(const ExprPtr& e) { return print(*e); }

// ---------------------------------------------------------------------------
// Parsing

/// Maximum bracket nesting depth and maximum run of stacked unary signs.
inline constexpr int kMaxDepth = 16;

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, std::span<const Token> toks, Mode mode)
      : src_(src), toks_(toks), mode_(mode) {}

  ExprPtr parse_root() {
    if (toks_.empty()) fail(0, "empty expression");
    if (mode_ == Mode::Fraction) {
      if (auto bare = try_bare_fraction()) return bare;
    }
    ExprPtr e = parse_additive();
    if (pos_ != toks_.size()) {
      const Token& t = toks_[pos_];
      if (t.kind == TokenKind::RParen || t.kind == TokenKind::RBracket) {
        fail(t.offset, "unbalanced closing bracket");
      }
      fail(t.offset, "unexpected '" + std::string(t.text) + "'");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(std::size_t offset, const std::string& what) const {
    throw Error(ErrorCode::Syntax, what + " at offset " + std::to_string(offset), offset);
  }

  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
  }
  bool at(TokenKind k, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t != nullptr && t->kind == k;
  }
  std::size_t here() const { return pos_ < toks_.size() ? toks_[pos_].offset : src_.size(); }

  ExprPtr try_bare_fraction() {
    std::size_t i = 0;
    bool negative = false;
    if (toks_.size() == 4 && toks_[0].kind == TokenKind::Minus) {
      negative = true;
      i = 1;
    }
    if (toks_.size() != i + 3) return nullptr;
    if (toks_[i].kind != TokenKind::DigitRun || toks_[i + 1].kind != TokenKind::Slash ||
        toks_[i + 2].kind != TokenKind::DigitRun) {
      return nullptr;
    }
    WideInt num = WideInt::parse(toks_[i].text);
    if (negative) num = -num;
    pos_ = toks_.size();
    return make_expr(FractionLit{num, WideInt::parse(toks_[i + 2].text), true, false});
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
      BinOp op = at(TokenKind::Plus) ? BinOp::Add : BinOp::Sub;
      ++pos_;
      ExprPtr rhs = parse_multiplicative();
      lhs = make_expr(Binary{op, lhs, rhs});
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_unary();
    while (at(TokenKind::Star) || at(TokenKind::Slash)) {
      BinOp op = at(TokenKind::Star) ? BinOp::Mul : BinOp::Div;
      ++pos_;
      ExprPtr rhs = parse_unary();
      lhs = make_expr(Binary{op, lhs, rhs});
    }
    return lhs;
  }

  // A sign directly followed by a number literal forms a negative literal,
  // unless the number is the base of a power: -3^2 is -(3^2).
  bool negative_literal_ahead() const {
    if (!at(TokenKind::Minus) || !at(TokenKind::DigitRun, 1)) return false;
    std::size_t k = 2;
    if (at(TokenKind::Dot, k)) k += 2;
    if (at(TokenKind::Percent, k)) ++k;
    return !at(TokenKind::Caret, k);
  }

  ExprPtr parse_unary() {
    if (negative_literal_ahead()) {
      ++pos_;
      return parse_power(parse_number(true));
    }
    if (at(TokenKind::Minus) || at(TokenKind::Plus)) {
      const char sign = peek()->text[0];
      const std::size_t offset = here();
      ++pos_;
      if (++unary_depth_ > kMaxDepth) {
        throw Error(ErrorCode::DepthExceeded, "too many stacked signs at offset " + std::to_string(offset), offset);
      }
      ExprPtr operand = parse_unary();
      --unary_depth_;
      return make_expr(Unary{sign, operand, false});
    }
    return parse_power(parse_primary());
  }

  ExprPtr parse_power(ExprPtr base) {
    while (at(TokenKind::Caret)) {
      ++pos_;
      ExprPtr exponent;
      if (negative_literal_ahead()) {
        ++pos_;
        exponent = parse_number(true);
      } else if (at(TokenKind::Minus) || at(TokenKind::Plus)) {
        const char sign = peek()->text[0];
        ++pos_;
        exponent = make_expr(Unary{sign, parse_primary(), false});
      } else {
        exponent = parse_primary();
      }
      base = make_expr(Binary{BinOp::Pow, base, exponent});
    }
    return base;
  }

  ExprPtr parse_number(bool negative) {
    const std::size_t start = negative ? toks_[pos_ - 1].offset : here();
    if (!at(TokenKind::DigitRun)) fail(here(), "expected number");
    std::string_view int_part = peek()->text;
    ++pos_;
    std::optional<std::string_view> frac_part;
    if (at(TokenKind::Dot)) {
      ++pos_;
      if (!at(TokenKind::DigitRun)) fail(here(), "malformed number");
      frac_part = peek()->text;
      ++pos_;
    }
    bool percent = false;
    if (at(TokenKind::Percent)) {
      percent = true;
      ++pos_;
    }
    if (at(TokenKind::Dot) || at(TokenKind::DigitRun)) fail(here(), "malformed number");
    const std::size_t end = here();
    std::string text(src_.substr(start, end - start));

    std::string numeric(negative ? "-" : "");
    numeric += int_part;
    NumberValue value;
    if (frac_part) {
      numeric += '.';
      numeric += *frac_part;
      value = NumberValue(Dec64::parse(numeric), Origin::Decimal);
    } else {
      value = NumberValue(WideInt::parse(numeric), Origin::Integer);
    }
    if (percent) {
      value = value.with_origin(Origin::Percent);
    } else if (negative) {
      value = value.with_origin(Origin::Negative);
    }
    return make_expr(NumberLit{std::move(value), std::move(text), percent});
  }

  ExprPtr try_fraction_literal() {
    std::size_t k = 1;
    bool negative = false;
    if (at(TokenKind::Minus, k)) {
      negative = true;
      ++k;
    }
    if (!at(TokenKind::DigitRun, k) || !at(TokenKind::Slash, k + 1) ||
        !at(TokenKind::DigitRun, k + 2) || !at(TokenKind::RParen, k + 3)) {
      return nullptr;
    }
    WideInt num = WideInt::parse(peek(k)->text);
    if (negative) num = -num;
    WideInt den = WideInt::parse(peek(k + 2)->text);
    if (den.is_zero()) throw Error(ErrorCode::DivByZero, "zero denominator", peek(k + 2)->offset);
    pos_ += k + 4;
    return make_expr(FractionLit{num, den, false, false});
  }

  ExprPtr parse_primary() {
    const Token* t = peek();
    if (t == nullptr) fail(src_.size(), "unexpected end of expression");
    switch (t->kind) {
      case TokenKind::DigitRun:
        return parse_number(false);
      case TokenKind::LParen:
      case TokenKind::LBracket: {
        if (t->kind == TokenKind::LParen && mode_ == Mode::Fraction) {
          if (auto f = try_fraction_literal()) return f;
        }
        const bool square = t->kind == TokenKind::LBracket;
        const std::size_t open = t->offset;
        ++pos_;
        if (++depth_ > kMaxDepth) {
          throw Error(ErrorCode::DepthExceeded,
                      "bracket nesting deeper than " + std::to_string(kMaxDepth) + " at offset " +
                          std::to_string(open),
                      open);
        }
        ExprPtr inner = parse_additive();
        --depth_;
        const TokenKind close = square ? TokenKind::RBracket : TokenKind::RParen;
        if (!at(close)) {
          if (peek() == nullptr) fail(open, "unbalanced opening bracket");
          fail(here(), "mismatched bracket");
        }
        ++pos_;
        return make_expr(Group{square ? Bracket::Square : Bracket::Paren, inner});
      }
      default:
        fail(t->offset, "dangling operator or unexpected '" + std::string(t->text) + "'");
    }
  }

  std::string_view src_;
  std::span<const Token> toks_;
  Mode mode_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  int unary_depth_ = 0;
};

}  // namespace detail

/// Parses a single expression (no `=` chain).
///
/// Precedence from tightest: `^`, sign application, `*` `/`, `+` `-`; equal
/// precedence associates left. A sign written directly before a number is
/// part of that literal (`-3338`), except before a power base.
inline ExprPtr parse(std::string_view src, Mode mode = Mode::Standard) {
  std::vector<Token> toks = lex(src);
  detail::Parser p(src, toks, mode);
  return p.parse_root();
}

// ---------------------------------------------------------------------------
// Queries

/// Number of binary operator nodes; sign applications are not counted.
inline int count_atomic_ops(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Unary>) return count_atomic_ops(*n.operand);
        else if constexpr (std::is_same_v<T, Binary>) return 1 + count_atomic_ops(*n.lhs) + count_atomic_ops(*n.rhs);
        else if constexpr (std::is_same_v<T, Group>) return count_atomic_ops(*n.inner);
        else return 0;
      },
      e.node);
}
inline int count_atomic_ops(const ExprPtr& e) { return count_atomic_ops(*e); }

/// Structural equality including surface details (literal text, bracket kind,
/// fraction style). Value-only flags such as `computed` are ignored.
inline bool same_tree(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, NumberLit>) {
          return x.text == y.text;
        } else if constexpr (std::is_same_v<T, FractionLit>) {
          return x.num == y.num && x.den == y.den && x.bare == y.bare;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return x.sign == y.sign && same_tree(*x.operand, *y.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && same_tree(*x.lhs, *y.lhs) && same_tree(*x.rhs, *y.rhs);
        } else {
          return x.kind == y.kind && same_tree(*x.inner, *y.inner);
        }
      },
      a.node);
}

}  // namespace stepwise
