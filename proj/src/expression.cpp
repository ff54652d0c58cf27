#include "pqspectra/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>

#include "pqspectra/error.hpp"

namespace pqs {

namespace {

struct Fn {
  std::string_view name;
  int arity;
};

constexpr std::array<Fn, 13> kFunctions{{{"sin", 1},
                                          {"cos", 1},
                                          {"tan", 1},
                                          {"exp", 1},
                                          {"log", 1},
                                          {"sqrt", 1},
                                          {"abs", 1},
                                          {"tanh", 1},
                                          {"hypot", 2},
                                          {"min", 2},
                                          {"max", 2},
                                          {"pow", 2},
                                          {"atan2", 2}}};

double call1(int fn, double a) {
  switch (fn) {
    case 0: return std::sin(a);
    case 1: return std::cos(a);
    case 2: return std::tan(a);
    case 3: return std::exp(a);
    case 4: return std::log(a);
    case 5: return std::sqrt(a);
    case 6: return std::abs(a);
    case 7: return std::tanh(a);
    default: return std::nan("");
  }
}

double call2(int fn, double a, double b) {
  switch (fn) {
    case 8: return std::hypot(a, b);
    case 9: return std::min(a, b);
    case 10: return std::max(a, b);
    case 11: return std::pow(a, b);
    case 12: return std::atan2(a, b);
    default: return std::nan("");
  }
}

class Parser {
 public:
  Parser(std::string_view src, std::vector<Expression::Op>& out) : src_(src), out_(out) {}

  void run() {
    expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected character");
  }

  bool uses_coordinates = false;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("expression '" + std::string(src_) + "': " + what + " at column " +
                          std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Expression::Op::Kind k, double v = 0.0, int fn = 0) { out_.push_back({k, v, fn}); }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Expression::Op::Add);
      } else if (accept('-')) {
        term();
        emit(Expression::Op::Sub);
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Expression::Op::Mul);
      } else if (accept('/')) {
        unary();
        emit(Expression::Op::Div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Expression::Op::Neg);
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }

  void power() {
    primary();
    if (accept('^')) {
      unary();  // right associative
      emit(Expression::Op::Pow);
    }
  }

  void primary() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.data() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      emit(Expression::Op::Number, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      if (accept('(')) {
        for (std::size_t k = 0; k < kFunctions.size(); ++k) {
          if (kFunctions[k].name != name) continue;
          expr();
          if (kFunctions[k].arity == 2) {
            if (!accept(',')) fail("expected ',' in call to " + std::string(name));
            expr();
          }
          if (!accept(')')) fail("expected ')'");
          emit(kFunctions[k].arity == 1 ? Expression::Op::Call1 : Expression::Op::Call2, 0.0, static_cast<int>(k));
          return;
        }
        pos_ = start;
        fail("unknown function '" + std::string(name) + "'");
      }
      if (name == "x") {
        uses_coordinates = true;
        emit(Expression::Op::VarX);
      } else if (name == "y") {
        uses_coordinates = true;
        emit(Expression::Op::VarY);
      } else if (name == "pi") {
        emit(Expression::Op::Number, std::numbers::pi);
      } else if (name == "e") {
        emit(Expression::Op::Number, std::numbers::e);
      } else {
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
      }
      return;
    }
    if (accept('(')) {
      expr();
      if (!accept(')')) fail("expected ')'");
      return;
    }
    fail("unexpected character");
  }

  std::string_view src_;
  std::vector<Expression::Op>& out_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  Parser p(e.text_, e.program_);
  p.run();
  e.constant_ = !p.uses_coordinates;
  return e;
}

double Expression::operator()(double x, double y) const {
  double stack[64];
  int top = 0;
  for (const Op& op : program_) {
    switch (op.kind) {
      case Op::Number: stack[top++] = op.value; break;
      case Op::VarX: stack[top++] = x; break;
      case Op::VarY: stack[top++] = y; break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Add: --top; stack[top - 1] += stack[top]; break;
      case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::Div: --top; stack[top - 1] /= stack[top]; break;
      case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::Call1: stack[top - 1] = call1(op.fn, stack[top - 1]); break;
      case Op::Call2: --top; stack[top - 1] = call2(op.fn, stack[top - 1], stack[top]); break;
    }
    if (top >= 63) throw ValidationError("expression '" + text_ + "': nesting too deep");
  }
  return stack[0];
}

}  // namespace pqs
