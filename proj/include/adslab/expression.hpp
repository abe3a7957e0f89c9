#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>

#include "adslab/errors.hpp"
#include "adslab/numeric_policy.hpp"

namespace adslab {

// Real expression in the variables x, y, r = sqrt(x^2 + y^2) and, for points
// of the unit disc, d = 2 atanh(r) (hyperbolic distance to 0), e.g.
// "0.3 + 0.1 * (x^2 - y^2) * (1 - r^2)^2". Supports + - * / ^, unary minus,
// parentheses, pi, and the usual one-argument functions.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::string text) : text_(std::move(text)) {
    pos_ = 0;
    root_ = parse_sum();
    skip();
    if (pos_ != text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
  }

  double operator()(double x, double y) const {
    if (!root_) return 0.0;
    const double r = std::hypot(x, y);
    return root_(Vars{x, y, r, r < 1 ? 2.0 * std::atanh(r) : std::numeric_limits<double>::infinity()});
  }
  const std::string& text() const { return text_; }

 private:
  struct Vars {
    double x, y, r, d;
  };
  using Node = std::function<double(const Vars&)>;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::kInvalidInput, "expression '" + text_ + "' at " + std::to_string(pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Node parse_sum() {
    Node lhs = parse_product();
    for (;;) {
      if (eat('+')) {
        Node rhs = parse_product();
        lhs = [lhs, rhs](const Vars& v) { return lhs(v) + rhs(v); };
      } else if (eat('-')) {
        Node rhs = parse_product();
        lhs = [lhs, rhs](const Vars& v) { return lhs(v) - rhs(v); };
      } else {
        return lhs;
      }
    }
  }
  Node parse_product() {
    Node lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        Node rhs = parse_unary();
        lhs = [lhs, rhs](const Vars& v) { return lhs(v) * rhs(v); };
      } else if (eat('/')) {
        Node rhs = parse_unary();
        lhs = [lhs, rhs](const Vars& v) { return lhs(v) / rhs(v); };
      } else {
        return lhs;
      }
    }
  }
  Node parse_unary() {
    if (eat('-')) {
      Node arg = parse_unary();
      return [arg](const Vars& v) { return -arg(v); };
    }
    if (eat('+')) return parse_unary();
    return parse_power();
  }
  // Right associative; binds tighter than unary minus on its left.
  Node parse_power() {
    Node base = parse_atom();
    if (eat('^')) {
      Node exponent = parse_unary();
      return [base, exponent](const Vars& v) { return std::pow(base(v), exponent(v)); };
    }
    return base;
  }
  Node parse_atom() {
    skip();
    if (pos_ >= text_.size()) error("unexpected end");
    if (eat('(')) {
      Node inner = parse_sum();
      if (!eat(')')) error("missing ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double value = std::stod(text_.substr(pos_), &used);
      pos_ += used;
      return [value](const Vars&) { return value; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "x") return [](const Vars& v) { return v.x; };
      if (name == "y") return [](const Vars& v) { return v.y; };
      if (name == "r") return [](const Vars& v) { return v.r; };
      if (name == "d") return [](const Vars& v) { return v.d; };
      if (name == "pi") return [](const Vars&) { return kPi; };
      static const std::map<std::string, double (*)(double)> functions{
          {"sin", [](double a) { return std::sin(a); }},   {"cos", [](double a) { return std::cos(a); }},
          {"tan", [](double a) { return std::tan(a); }},   {"exp", [](double a) { return std::exp(a); }},
          {"log", [](double a) { return std::log(a); }},   {"sqrt", [](double a) { return std::sqrt(a); }},
          {"sinh", [](double a) { return std::sinh(a); }}, {"cosh", [](double a) { return std::cosh(a); }},
          {"tanh", [](double a) { return std::tanh(a); }}, {"atan", [](double a) { return std::atan(a); }},
          {"abs", [](double a) { return std::abs(a); }}};
      const auto it = functions.find(name);
      if (it == functions.end()) error("unknown name '" + name + "'");
      if (!eat('(')) error("expected '(' after " + name);
      Node arg = parse_sum();
      if (!eat(')')) error("missing ')'");
      return [fn = it->second, arg](const Vars& v) { return fn(arg(v)); };
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string text_;
  std::size_t pos_ = 0;
  Node root_;
};

}  // namespace adslab
