#include "gapcert/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gapcert::expr {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      message_(message),
      line_(line),
      column_(column) {}

double arccot(double x) { return std::numbers::pi / 2.0 - std::atan(x); }

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Ln, Sqrt, Atan, Arccot };

struct Node {
  Op op = Op::Const;
  double value = 0.0;
  int var = 0;  // zero-based
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;
};

namespace {

double eval(const Node& n, std::span<const double> vars) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return vars[n.var];
    case Op::Neg: return -eval(*n.lhs, vars);
    case Op::Add: return eval(*n.lhs, vars) + eval(*n.rhs, vars);
    case Op::Sub: return eval(*n.lhs, vars) - eval(*n.rhs, vars);
    case Op::Mul: return eval(*n.lhs, vars) * eval(*n.rhs, vars);
    case Op::Div: return eval(*n.lhs, vars) / eval(*n.rhs, vars);
    case Op::Pow: {
      const double base = eval(*n.lhs, vars);
      if (n.rhs->op == Op::Const) {
        const double e = n.rhs->value;
        if (e == 2.0) return base * base;
        if (e == 3.0) return base * base * base;
        if (e == 4.0) {
          const double b2 = base * base;
          return b2 * b2;
        }
      }
      return std::pow(base, eval(*n.rhs, vars));
    }
    case Op::Sin: return std::sin(eval(*n.lhs, vars));
    case Op::Cos: return std::cos(eval(*n.lhs, vars));
    case Op::Exp: return std::exp(eval(*n.lhs, vars));
    case Op::Ln: return std::log(eval(*n.lhs, vars));
    case Op::Sqrt: return std::sqrt(eval(*n.lhs, vars));
    case Op::Atan: return std::atan(eval(*n.lhs, vars));
    case Op::Arccot: return arccot(eval(*n.lhs, vars));
  }
  return std::nan("");
}

class Parser {
 public:
  Parser(std::string_view text, int n_vars, int line)
      : text_(text), n_vars_(n_vars), line_(line) {}

  std::unique_ptr<Node> parse_all() {
    skip_ws();
    if (at_end()) fail("empty expression");
    auto root = parse_expr();
    skip_ws();
    if (!at_end()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return root;
  }

  int max_variable() const { return max_var_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int n_vars_;
  int line_;
  int max_var_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    // Columns count code points, 1-based.
    int col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i)
      if ((static_cast<unsigned char>(text_[i]) & 0xC0) != 0x80) ++col;
    throw ParseError(msg, line_, col);
  }

  bool at_end() const { return pos_ >= text_.size(); }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  // Returns the operator character at the cursor, mapping U+2212 to '-'.
  char peek_op() const {
    if (at_end()) return '\0';
    if (text_.substr(pos_, 3) == "\xE2\x88\x92") return '-';
    return text_[pos_];
  }

  void consume_op() { pos_ += (text_.substr(pos_, 3) == "\xE2\x88\x92") ? 3 : 1; }

  static std::unique_ptr<Node> binary(Op op, std::unique_ptr<Node> l, std::unique_ptr<Node> r) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  std::unique_ptr<Node> parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      skip_ws();
      const char c = peek_op();
      if (c != '+' && c != '-') return lhs;
      consume_op();
      auto rhs = parse_term();
      lhs = binary(c == '+' ? Op::Add : Op::Sub, std::move(lhs), std::move(rhs));
    }
  }

  std::unique_ptr<Node> parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      skip_ws();
      const char c = peek_op();
      if (c != '*' && c != '/') return lhs;
      consume_op();
      auto rhs = parse_unary();
      lhs = binary(c == '*' ? Op::Mul : Op::Div, std::move(lhs), std::move(rhs));
    }
  }

  std::unique_ptr<Node> parse_unary() {
    skip_ws();
    const char c = peek_op();
    if (c == '-') {
      consume_op();
      auto n = std::make_unique<Node>();
      n->op = Op::Neg;
      n->lhs = parse_unary();
      return n;
    }
    if (c == '+') {
      consume_op();
      return parse_unary();
    }
    return parse_power();
  }

  std::unique_ptr<Node> parse_power() {
    auto base = parse_primary();
    skip_ws();
    if (peek_op() == '^') {
      consume_op();
      auto exponent = parse_unary();
      return binary(Op::Pow, std::move(base), std::move(exponent));
    }
    return base;
  }

  std::unique_ptr<Node> parse_primary() {
    skip_ws();
    if (at_end()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_expr();
      skip_ws();
      if (at_end() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail(std::string("unexpected '") + c + "'");
  }

  std::unique_ptr<Node> parse_number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (!at_end() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto* first = text_.data() + start;
    const auto* last = text_.data() + pos_;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) fail_at("malformed number", start);
    auto n = std::make_unique<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  std::unique_ptr<Node> parse_name() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));

    skip_ws();
    if (!at_end() && text_[pos_] == '(') {
      static const std::pair<const char*, Op> functions[] = {
          {"sin", Op::Sin},   {"cos", Op::Cos},   {"exp", Op::Exp},      {"ln", Op::Ln},
          {"sqrt", Op::Sqrt}, {"atan", Op::Atan}, {"arccot", Op::Arccot}};
      for (const auto& [fname, op] : functions) {
        if (name == fname) {
          ++pos_;
          auto n = std::make_unique<Node>();
          n->op = op;
          n->lhs = parse_expr();
          skip_ws();
          if (at_end() || text_[pos_] != ')') fail("expected ')' after function argument");
          ++pos_;
          return n;
        }
      }
      fail_at("unknown function '" + name + "'", start);
    }

    auto n = std::make_unique<Node>();
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "e") {
      n->value = std::numbers::e;
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size() && name[1] != '0') {
        if (idx < 1 || idx > n_vars_)
          fail_at("variable '" + name + "' out of range (system has " + std::to_string(n_vars_) +
                      " variables)",
                  start);
        n->op = Op::Var;
        n->var = idx - 1;
        max_var_ = std::max(max_var_, idx);
        return n;
      }
    }
    fail_at("unknown identifier '" + name + "'", start);
  }
};

}  // namespace

double Expression::evaluate(std::span<const double> vars) const {
  return root_ ? eval(*root_, vars) : std::nan("");
}

Expression parse(std::string_view text, int n_vars, int line) {
  Parser p(text, n_vars, line);
  Expression e;
  e.root_ = p.parse_all();
  e.source_ = std::string(text);
  e.max_variable_ = p.max_variable();
  return e;
}

}  // namespace gapcert::expr
