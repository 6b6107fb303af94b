#pragma once

// Recursive-descent parser for the expression grammar shared by the CLI
// file format: integers, identifiers [a-z][a-z0-9]*, + - * /, unary minus,
// ^ binding tightest with an integer or parenthesized rational exponent,
// sqrt(...), parentheses.

#include <cctype>
#include <string>

#include "ocfact/expr.hpp"

namespace ocfact {

namespace detail {

struct Lexer {
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const std::string& what) {
    if (!accept(c)) throw SyntaxError(pos, what, current_token());
  }
  std::string current_token() {
    skip_ws();
    if (pos >= text.size()) return "end of input";
    std::size_t e = pos;
    if (std::isalnum((unsigned char)text[e])) {
      while (e < text.size() && std::isalnum((unsigned char)text[e])) ++e;
    } else {
      ++e;
    }
    return text.substr(pos, e - pos);
  }
  bool number_next() { return std::isdigit((unsigned char)peek()); }
  bool ident_next() {
    char c = peek();
    return std::islower((unsigned char)c);
  }
  Integer read_integer() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit((unsigned char)text[pos])) ++pos;
    if (start == pos) throw SyntaxError(pos, "integer", current_token());
    return Integer(text.substr(start, pos - start));
  }
  std::string read_ident() {
    skip_ws();
    std::size_t start = pos;
    if (pos >= text.size() || !std::islower((unsigned char)text[pos]))
      throw SyntaxError(pos, "identifier", current_token());
    ++pos;
    while (pos < text.size() &&
           (std::islower((unsigned char)text[pos]) || std::isdigit((unsigned char)text[pos])))
      ++pos;
    return text.substr(start, pos - start);
  }
};

struct Parser {
  Lexer lex;
  FramePtr frame;

  Expr parse_sum() {
    Expr acc = parse_term();
    while (true) {
      if (lex.accept('+'))
        acc = acc + parse_term();
      else if (lex.accept('-'))
        acc = acc - parse_term();
      else
        return acc;
    }
  }

  Expr parse_term() {
    Expr acc = parse_unary();
    while (true) {
      if (lex.accept('*'))
        acc = acc * parse_unary();
      else if (lex.accept('/'))
        acc = acc / parse_unary();
      else
        return acc;
    }
  }

  Expr parse_unary() {
    if (lex.accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (lex.accept('^')) return base.pow(parse_exponent());
    return base;
  }

  // integer, -integer, or parenthesized rational with optional sign
  Rational parse_exponent() {
    bool paren = lex.accept('(');
    long sign = 1;
    if (lex.accept('-')) sign = -1;
    Integer num = lex.read_integer();
    Integer den = 1;
    if (paren && lex.accept('/')) den = lex.read_integer();
    if (paren) lex.expect(')', "')' closing the exponent");
    if (den == 0) throw SyntaxError(lex.pos, "nonzero exponent denominator", "0");
    Rational r(sign * num, den);
    r.canonicalize();
    return r;
  }

  Expr parse_primary() {
    if (lex.accept('(')) {
      Expr e = parse_sum();
      lex.expect(')', "')'");
      return e;
    }
    if (lex.number_next()) return Expr::constant(frame, Rational(lex.read_integer()));
    if (lex.ident_next()) {
      std::string name = lex.read_ident();
      if (name == "sqrt") {
        lex.expect('(', "'(' after sqrt");
        Expr e = parse_sum();
        lex.expect(')', "')' closing sqrt");
        return e.sqrt();
      }
      int idx = frame->index_of(name);
      if (idx < 0) throw UnknownSymbol(name);
      return Expr::variable(frame, idx);
    }
    throw SyntaxError(lex.pos, "number, identifier or '('", lex.current_token());
  }
};

}  // namespace detail

inline Expr parse_expression(const std::string& text, const FramePtr& frame) {
  detail::Parser p{detail::Lexer{text}, frame};
  Expr e = p.parse_sum();
  if (!p.lex.eof()) throw SyntaxError(p.lex.pos, "end of expression", p.lex.current_token());
  return e;
}

}  // namespace ocfact
