#pragma once

// Interpreted scalar expressions over variables x1..xn, used for
// user-defined vector fields.
//
// Grammar (whitespace insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | name | name '(' expr ')' | '(' expr ')'
// Names: x1..xn, pi, e. Functions: sin cos exp ln sqrt atan arccot.
// U+2212 MINUS SIGN is accepted as '-'.

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gapcert::expr {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

struct Node;

/// An immutable compiled expression; cheap to copy, safe to evaluate from
/// several threads.
class Expression {
 public:
  Expression() = default;
  double evaluate(std::span<const double> vars) const;
  const std::string& source() const noexcept { return source_; }
  /// Highest variable index referenced (x3 -> 3), 0 if none.
  int max_variable() const noexcept { return max_variable_; }

 private:
  friend Expression parse(std::string_view, int, int);
  std::shared_ptr<const Node> root_;
  std::string source_;
  int max_variable_ = 0;
};

/// Parses `text`; `line` is reported in errors. `n_vars` bounds the allowed
/// variable indices (x1..x<n_vars>).
Expression parse(std::string_view text, int n_vars, int line = 1);

/// arccot with range (0, pi), continuous and decreasing on the whole line.
double arccot(double x);

}  // namespace gapcert::expr
