#pragma once

#include <string>
#include <vector>

namespace pqs {

/// Arithmetic expression in the coordinates x and y, e.g. "2 + 0.5*x" or
/// "1.5 + max(0, hypot(x-0.5, y-0.5) - 0.2)".
///
/// Supports + - * / ^, unary minus, parentheses, the constants pi and e, and
/// sin cos tan exp log sqrt abs tanh hypot min max pow. Compiled once to a
/// postfix program; evaluation is reentrant.
class Expression {
 public:
  /// Throws ValidationError with the column of the first offending character.
  static Expression parse(const std::string& text);

  double operator()(double x, double y) const;

  const std::string& text() const noexcept { return text_; }
  /// True when the expression does not reference x or y.
  bool is_constant() const noexcept { return constant_; }

  struct Op {
    enum Kind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call1, Call2 } kind;
    double value = 0.0;
    int fn = 0;
  };

 private:
  std::string text_;
  std::vector<Op> program_;
  bool constant_ = true;
};

}  // namespace pqs
