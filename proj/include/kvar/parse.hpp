#pragma once

#include <cctype>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kvar/poly.hpp"
#include "kvar/qpoly.hpp"

namespace kvar {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Recursive-descent parser for  + - * / ^ ( )  over integers and identifiers
/// [a-zA-Z][a-zA-Z0-9_]*. The value type T supplies the arithmetic.
template <class T>
class ExprParser {
 public:
  using VarFn = std::function<T(std::string_view)>;
  using ConstFn = std::function<T(const Rational&)>;
  using DivFn = std::function<T(const T&, const T&)>;

  ExprParser(VarFn var, ConstFn constant, DivFn divide = nullptr)
      : var_(std::move(var)), const_(std::move(constant)), div_(std::move(divide)) {}

  T parse(std::string_view text) {
    src_ = text;
    pos_ = 0;
    skip_ws();
    if (pos_ == src_.size()) fail("empty expression");
    T v = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character");
    return v;
  }

 private:
  VarFn var_;
  ConstFn const_;
  DivFn div_;
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(src_) + "'");
  }
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  T expr() {
    T acc = term();
    while (true) {
      if (eat('+'))
        acc = acc + term();
      else if (eat('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  T term() {
    T acc = unary();
    while (true) {
      if (eat('*')) {
        acc = acc * unary();
      } else if (eat('/')) {
        if (!div_) fail("division not allowed");
        acc = div_(acc, unary());
      } else {
        return acc;
      }
    }
  }

  T unary() {
    if (eat('-')) return const_(Rational(-1)) * unary();
    return power();
  }

  T power() {
    T base = atom();
    if (eat('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer literal");
      unsigned e = static_cast<unsigned>(std::stoul(std::string(src_.substr(start, pos_ - start))));
      return base.pow(e);
    }
    return base;
  }

  T atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      T v = expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return const_(Rational(Integer(std::string(src_.substr(start, pos_ - start)))));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      ++pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      return var_(src_.substr(start, pos_ - start));
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

/// Parses a polynomial; division is allowed only by nonzero constants.
inline Poly parse_poly(std::string_view text, const std::function<VarId(std::string_view)>& lookup) {
  ExprParser<Poly> p([&](std::string_view n) { return Poly::var(lookup(n)); },
                     [](const Rational& c) { return Poly(c); },
                     [](const Poly& a, const Poly& b) {
                       if (!b.is_constant() || b.is_zero()) throw ParseError("division by a non-constant");
                       return a.scaled(1 / b.constant_value());
                     });
  return p.parse(text);
}

/// Parses an element of Q(q); the only identifier allowed is q.
inline RatFunc parse_ratfunc(std::string_view text) {
  ExprParser<RatFunc> p(
      [](std::string_view n) {
        if (n != "q") throw ParseError("unknown identifier '" + std::string(n) + "'");
        return RatFunc(QPoly::q());
      },
      [](const Rational& c) { return RatFunc(QPoly(c)); },
      [](const RatFunc& a, const RatFunc& b) {
        if (b.is_zero()) throw ParseError("division by zero");
        return a / b;
      });
  return p.parse(text);
}

inline QPoly parse_qpoly(std::string_view text) {
  RatFunc r = parse_ratfunc(text);
  if (!r.is_polynomial()) throw ParseError("expected a polynomial in q: '" + std::string(text) + "'");
  return r.num().scaled(1 / r.den().lead());
}

}  // namespace kvar
