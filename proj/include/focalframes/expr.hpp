#ifndef FOCALFRAMES_EXPR_HPP
#define FOCALFRAMES_EXPR_HPP

#include <memory>
#include <string>
#include <type_traits>
#include <vector>

#include "focalframes/jets.hpp"

namespace focalframes {

enum class ExprKind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class Func { Sin, Cos, Exp, Log, Sqrt };

/// Immutable expression tree over named parameters. Powers are integer by
/// construction; the parser folds exponents and rejects the rest.
struct Expr {
  ExprKind kind = ExprKind::Const;
  double cval = 0.0;
  int var = -1;
  int ipow = 0;
  Func func = Func::Sin;
  std::shared_ptr<const Expr> a, b;
};

using ExprPtr = std::shared_ptr<const Expr>;

ExprPtr make_const(double c);
ExprPtr make_var(int i);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_scale(double s, ExprPtr a);

/// Parses one infix expression over the given parameter names. Unknown names,
/// wrong arity, and syntax problems raise the matching error with the line
/// and column in the message.
ExprPtr parse_expression(const std::string& text, const std::vector<std::string>& params);

/// Parses a comma-separated list of expressions.
std::vector<ExprPtr> parse_expression_list(const std::string& text,
                                           const std::vector<std::string>& params);

namespace detail {

template <class S>
S jet_const(int m, double c);
template <>
inline double jet_const<double>(int, double c) {
  return c;
}
template <>
inline Taylor1 jet_const<Taylor1>(int m, double c) {
  return Taylor1::constant(m, c);
}
template <>
inline Taylor2 jet_const<Taylor2>(int m, double c) {
  return Taylor2::constant(m, c);
}

} // namespace detail

/// Evaluates over doubles or jet scalars; m is the parameter count the jet
/// scalars carry.
template <class S>
S eval_expr(const ExprPtr& e, const std::vector<S>& vars, int m) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  if (!e) fail(Errc::DomainError, "empty expression");
  switch (e->kind) {
    case ExprKind::Const:
      return detail::jet_const<S>(m, e->cval);
    case ExprKind::Var:
      return vars[static_cast<std::size_t>(e->var)];
    case ExprKind::Add:
      return eval_expr(e->a, vars, m) + eval_expr(e->b, vars, m);
    case ExprKind::Sub:
      return eval_expr(e->a, vars, m) - eval_expr(e->b, vars, m);
    case ExprKind::Mul:
      return eval_expr(e->a, vars, m) * eval_expr(e->b, vars, m);
    case ExprKind::Div: {
      S num = eval_expr(e->a, vars, m);
      S den = eval_expr(e->b, vars, m);
      if constexpr (std::is_same_v<S, double>) {
        if (den == 0.0) fail(Errc::DomainError, "division by zero");
      }
      return num / den;
    }
    case ExprKind::Neg:
      return -eval_expr(e->a, vars, m);
    case ExprKind::Pow: {
      S base = eval_expr(e->a, vars, m);
      if constexpr (std::is_same_v<S, double>) {
        if (base == 0.0 && e->ipow < 0) fail(Errc::DomainError, "division by zero");
      }
      return jet_ipow(base, e->ipow, detail::jet_const<S>(m, 1.0));
    }
    case ExprKind::Call: {
      S sub = eval_expr(e->a, vars, m);
      switch (e->func) {
        case Func::Sin: return sin(sub);
        case Func::Cos: return cos(sub);
        case Func::Exp: return exp(sub);
        case Func::Log:
          if constexpr (std::is_same_v<S, double>) {
            if (sub <= 0.0) fail(Errc::DomainError, "log of a non-positive value");
          }
          return log(sub);
        case Func::Sqrt:
          if constexpr (std::is_same_v<S, double>) {
            if (sub < 0.0) fail(Errc::DomainError, "sqrt of a negative value");
          }
          return sqrt(sub);
      }
      fail(Errc::DomainError, "unhandled function");
    }
  }
  fail(Errc::DomainError, "unhandled expression node");
}

} // namespace focalframes

#endif
