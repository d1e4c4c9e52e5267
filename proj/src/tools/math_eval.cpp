// SPDX-License-Identifier: Apache-2.0
#include "agentkit/tools/math_eval.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

namespace agentkit::tools {
namespace {

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/'|'%') unary)*
// unary  := ('-'|'+') unary | power
// power  := atom ('^' unary)?
// atom   := number | ident | ident '(' args ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  double parse() {
    double v = expr();
    skip();
    if (pos_ != s_.size()) throw MathError(fmt::format("unexpected '{}' at offset {}", s_[pos_], pos_));
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) {
        if (eat('*')) v = std::pow(v, unary());
        else v *= unary();
      } else if (eat('/')) {
        double d = unary();
        if (d == 0) throw MathError("division by zero");
        v /= d;
      } else if (eat('%')) {
        double d = unary();
        if (d == 0) throw MathError("modulo by zero");
        v = std::fmod(v, d);
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }

  double power() {
    double base = atom();
    if (eat('^')) return std::pow(base, unary());
    return base;
  }

  double atom() {
    skip();
    if (pos_ >= s_.size()) throw MathError("unexpected end of expression");
    char c = s_[pos_];
    if (eat('(')) {
      double v = expr();
      if (!eat(')')) throw MathError(fmt::format("expected ')' at offset {}", pos_));
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw MathError(fmt::format("unexpected '{}' at offset {}", c, pos_));
  }

  double number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == '_')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string text;
    for (char ch : s_.substr(start, pos_ - start))
      if (ch != '_') text += ch;
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw MathError("malformed number '" + text + "'");
      return v;
    } catch (const std::logic_error&) {
      throw MathError("malformed number '" + text + "'");
    }
  }

  double identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string name(s_.substr(start, pos_ - start));
    if (!eat('(')) {
      if (name == "pi") return std::numbers::pi;
      if (name == "e") return std::numbers::e;
      throw MathError("unknown constant '" + name + "'");
    }
    std::vector<double> args;
    if (!eat(')')) {
      do args.push_back(expr());
      while (eat(','));
      if (!eat(')')) throw MathError("expected ')' after arguments of " + name);
    }
    return call(name, args);
  }

  static double call(const std::string& name, const std::vector<double>& a) {
    using F1 = double (*)(double);
    static const std::map<std::string, F1> unary{
        {"sqrt", [](double x) { return std::sqrt(x); }},   {"abs", [](double x) { return std::fabs(x); }},
        {"exp", [](double x) { return std::exp(x); }},     {"ln", [](double x) { return std::log(x); }},
        {"log", [](double x) { return std::log(x); }},     {"log10", [](double x) { return std::log10(x); }},
        {"log2", [](double x) { return std::log2(x); }},   {"sin", [](double x) { return std::sin(x); }},
        {"cos", [](double x) { return std::cos(x); }},     {"tan", [](double x) { return std::tan(x); }},
        {"asin", [](double x) { return std::asin(x); }},   {"acos", [](double x) { return std::acos(x); }},
        {"atan", [](double x) { return std::atan(x); }},   {"floor", [](double x) { return std::floor(x); }},
        {"ceil", [](double x) { return std::ceil(x); }},   {"round", [](double x) { return std::round(x); }},
    };
    if (auto it = unary.find(name); it != unary.end()) {
      if (a.size() != 1) throw MathError(name + " takes 1 argument");
      return it->second(a[0]);
    }
    if (name == "pow") {
      if (a.size() != 2) throw MathError("pow takes 2 arguments");
      return std::pow(a[0], a[1]);
    }
    if (name == "min" || name == "max") {
      if (a.empty()) throw MathError(name + " needs at least 1 argument");
      double v = a[0];
      for (double x : a) v = name == "min" ? std::min(v, x) : std::max(v, x);
      return v;
    }
    throw MathError("unknown function '" + name + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

double evaluate_expression(std::string_view expr) {
  double v = Parser(expr).parse();
  if (std::isnan(v)) throw MathError("result is not a number");
  return v;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::floor(v) == v && std::fabs(v) < 1e15) return fmt::format("{}", static_cast<long long>(v));
  return fmt::format("{:.12g}", v);
}

}  // namespace agentkit::tools
