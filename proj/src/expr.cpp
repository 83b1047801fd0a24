#include "focalframes/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>

namespace focalframes {

ExprPtr make_const(double c) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Const;
  e->cval = c;
  return e;
}

ExprPtr make_var(int i) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->var = i;
  return e;
}

namespace {

ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

} // namespace

ExprPtr make_add(ExprPtr a, ExprPtr b) { return make_binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr make_sub(ExprPtr a, ExprPtr b) { return make_binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr make_mul(ExprPtr a, ExprPtr b) { return make_binary(ExprKind::Mul, std::move(a), std::move(b)); }
ExprPtr make_scale(double s, ExprPtr a) { return make_mul(make_const(s), std::move(a)); }

namespace {

enum class Tok { Num, Ident, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double num = 0.0;
  int line = 1;
  int col = 1;
};

std::string at_pos(const Token& t) {
  return " (line " + std::to_string(t.line) + ", column " + std::to_string(t.col) + ")";
}

class Lexer {
public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r' ||
                                s_[pos_] == '\n')) {
      if (s_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= s_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      bool seen_dot = false;
      while (pos_ < s_.size()) {
        char d = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          ++pos_;
        } else if (d == '.' && !seen_dot) {
          seen_dot = true;
          ++pos_;
        } else {
          break;
        }
      }
      cur_.kind = Tok::Num;
      cur_.text = s_.substr(start, pos_ - start);
      if (cur_.text == ".")
        fail(Errc::SyntaxError, "stray '.'" + at_pos(cur_));
      cur_.num = std::strtod(cur_.text.c_str(), nullptr);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      cur_.kind = Tok::Ident;
      cur_.text = s_.substr(start, pos_ - start);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    static const std::string ops = "+-*/^(),";
    if (ops.find(c) != std::string::npos) {
      cur_.kind = Tok::Op;
      cur_.text = std::string(1, c);
      ++pos_;
      ++col_;
      return;
    }
    fail(Errc::SyntaxError, std::string("unexpected character '") + c + "'" + at_pos(cur_));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

class Parser {
public:
  Parser(const std::string& text, const std::vector<std::string>& params)
      : lex_(text), params_(params) {}

  ExprPtr parse_single() {
    ExprPtr e = expr();
    const Token& t = lex_.peek();
    if (t.kind != Tok::End)
      fail(Errc::SyntaxError, "unexpected '" + t.text + "'" + at_pos(t));
    return e;
  }

  std::vector<ExprPtr> parse_list() {
    std::vector<ExprPtr> out;
    out.push_back(expr());
    while (lex_.peek().kind == Tok::Op && lex_.peek().text == ",") {
      lex_.take();
      out.push_back(expr());
    }
    const Token& t = lex_.peek();
    if (t.kind != Tok::End)
      fail(Errc::SyntaxError, "unexpected '" + t.text + "'" + at_pos(t));
    return out;
  }

private:
  bool peek_op(const char* op) const {
    return lex_.peek().kind == Tok::Op && lex_.peek().text == op;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (peek_op("+") || peek_op("-")) {
      Token t = lex_.take();
      ExprPtr rhs = term();
      e = make_binary(t.text == "+" ? ExprKind::Add : ExprKind::Sub, std::move(e), std::move(rhs));
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = unary();
    while (peek_op("*") || peek_op("/")) {
      Token t = lex_.take();
      ExprPtr rhs = unary();
      e = make_binary(t.text == "*" ? ExprKind::Mul : ExprKind::Div, std::move(e), std::move(rhs));
    }
    return e;
  }

  ExprPtr unary() {
    if (peek_op("-")) {
      Token t = lex_.take();
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Neg;
      e->a = unary();
      return e;
    }
    if (peek_op("+")) {
      lex_.take();
      return unary();
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (!peek_op("^")) return base;
    Token caret = lex_.take();
    // Right-associative; the whole exponent must fold to an integer.
    ExprPtr ex = unary();
    double folded;
    if (!fold_const(ex, folded) || std::abs(folded - std::round(folded)) > 1e-9)
      fail(Errc::SyntaxError, "exponent must be an integer constant" + at_pos(caret));
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Pow;
    e->a = std::move(base);
    e->ipow = static_cast<int>(std::llround(folded));
    return e;
  }

  static bool fold_const(const ExprPtr& e, double& out) {
    switch (e->kind) {
      case ExprKind::Const:
        out = e->cval;
        return true;
      case ExprKind::Neg: {
        double a;
        if (!fold_const(e->a, a)) return false;
        out = -a;
        return true;
      }
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div: {
        double a, b;
        if (!fold_const(e->a, a) || !fold_const(e->b, b)) return false;
        if (e->kind == ExprKind::Add) out = a + b;
        else if (e->kind == ExprKind::Sub) out = a - b;
        else if (e->kind == ExprKind::Mul) out = a * b;
        else {
          if (b == 0.0) return false;
          out = a / b;
        }
        return true;
      }
      case ExprKind::Pow: {
        double a;
        if (!fold_const(e->a, a)) return false;
        out = std::pow(a, e->ipow);
        return true;
      }
      default:
        return false;
    }
  }

  ExprPtr atom() {
    Token t = lex_.take();
    if (t.kind == Tok::Num) return make_const(t.num);
    if (t.kind == Tok::Op && t.text == "(") {
      ExprPtr e = expr();
      Token close = lex_.take();
      if (!(close.kind == Tok::Op && close.text == ")"))
        fail(Errc::SyntaxError, "expected ')'" + at_pos(close));
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (peek_op("(")) return call(t);
      for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i] == t.text) return make_var(static_cast<int>(i));
      fail(Errc::UnknownIdentifier, "unknown identifier '" + t.text + "'" + at_pos(t));
    }
    fail(Errc::SyntaxError, "unexpected '" + (t.kind == Tok::End ? std::string("end of input") : t.text) + "'" + at_pos(t));
  }

  ExprPtr call(const Token& name) {
    Func f;
    if (name.text == "sin") f = Func::Sin;
    else if (name.text == "cos") f = Func::Cos;
    else if (name.text == "exp") f = Func::Exp;
    else if (name.text == "log") f = Func::Log;
    else if (name.text == "sqrt") f = Func::Sqrt;
    else fail(Errc::UnknownIdentifier, "unknown function '" + name.text + "'" + at_pos(name));
    lex_.take(); // '('
    std::vector<ExprPtr> args;
    if (peek_op(")")) {
      Token t = lex_.take();
      fail(Errc::ArityError, name.text + " takes one argument, got 0" + at_pos(t));
    }
    args.push_back(expr());
    while (peek_op(",")) {
      lex_.take();
      args.push_back(expr());
    }
    Token close = lex_.take();
    if (!(close.kind == Tok::Op && close.text == ")"))
      fail(Errc::SyntaxError, "expected ')'" + at_pos(close));
    if (args.size() != 1)
      fail(Errc::ArityError,
           name.text + " takes one argument, got " + std::to_string(args.size()) + at_pos(name));
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Call;
    e->func = f;
    e->a = args[0];
    return e;
  }

  Lexer lex_;
  const std::vector<std::string>& params_;
};

} // namespace

ExprPtr parse_expression(const std::string& text, const std::vector<std::string>& params) {
  Parser p(text, params);
  return p.parse_single();
}

std::vector<ExprPtr> parse_expression_list(const std::string& text,
                                           const std::vector<std::string>& params) {
  Parser p(text, params);
  return p.parse_list();
}

} // namespace focalframes
