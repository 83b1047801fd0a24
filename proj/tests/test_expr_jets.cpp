#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "focalframes/expr.hpp"
#include "focalframes/jets.hpp"

using namespace focalframes;

namespace {

double eval1(const std::string& text, double u, double v) {
  ExprPtr e = parse_expression(text, {"u", "v"});
  return eval_expr<double>(e, {u, v}, 2);
}

bool mentions_position(const Error& e, const char* needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("parsing follows the usual precedence and associativity") {
  CHECK(eval1("2 + 3 * 4", 0, 0) == doctest::Approx(14.0));
  CHECK(eval1("2 * u + v ^ 2", 3.0, 4.0) == doctest::Approx(22.0));
  CHECK(eval1("2 ^ 3 ^ 2", 0, 0) == doctest::Approx(512.0));  // right associative
  CHECK(eval1("-u ^ 2", 3.0, 0) == doctest::Approx(-9.0));
  CHECK(eval1("(2 + 3) * 4", 0, 0) == doctest::Approx(20.0));
  CHECK(eval1("u / v / 2", 12.0, 3.0) == doctest::Approx(2.0));
  CHECK(eval1("cos(0) + sin(0)", 0, 0) == doctest::Approx(1.0));
  CHECK(eval1("exp(log(5))", 0, 0) == doctest::Approx(5.0));
  CHECK(eval1("sqrt(u) * sqrt(u)", 7.0, 0) == doctest::Approx(7.0));
  CHECK(eval1("u ^ -2", 2.0, 0) == doctest::Approx(0.25));
  CHECK(eval1("1.5 + .0", 0, 0) == doctest::Approx(1.5));
}

TEST_CASE("parse errors carry their kind and source position") {
  auto expect = [](const std::string& text, Errc code, const char* pos) {
    try {
      parse_expression(text, {"u", "v"});
      FAIL("no error raised for: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == code);
      CHECK_MESSAGE(mentions_position(e, pos), e.what());
    }
  };
  expect("cos(u", Errc::SyntaxError, "(line 1, column");
  expect("u + ", Errc::SyntaxError, "(line 1, column");
  expect("u @ v", Errc::SyntaxError, "(line 1, column");
  expect("fo(u)", Errc::UnknownIdentifier, "(line 1, column 1)");
  expect("w + 1", Errc::UnknownIdentifier, "(line 1, column 1)");
  expect("sin()", Errc::ArityError, "(line 1, column");
  expect("sin(u, v)", Errc::ArityError, "(line 1, column");
  expect("u ^ v", Errc::SyntaxError, "(line 1, column");
  expect("u ^ 1.5", Errc::SyntaxError, "(line 1, column");
  expect("u v", Errc::SyntaxError, "(line 1, column");

  // Positions track newlines.
  try {
    parse_expression("u +\n  cos(w)", {"u"});
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownIdentifier);
    CHECK_MESSAGE(mentions_position(e, "(line 2, column 7)"), e.what());
  }
}

TEST_CASE("expression lists split on top-level commas only") {
  auto list = parse_expression_list("u + 1, cos(u), u ^ 2", {"u"});
  CHECK(list.size() == 3);
  CHECK(eval_expr<double>(list[2], {3.0}, 1) == doctest::Approx(9.0));
}

TEST_CASE("evaluation guards the classical domain holes") {
  CHECK_THROWS_AS(eval1("u / v", 1.0, 0.0), Error);
  CHECK_THROWS_AS(eval1("log(u)", -1.0, 0.0), Error);
  CHECK_THROWS_AS(eval1("log(u)", 0.0, 0.0), Error);
  CHECK_THROWS_AS(eval1("sqrt(u)", -4.0, 0.0), Error);
  CHECK_THROWS_AS(eval1("u ^ -1", 0.0, 0.0), Error);
}

TEST_CASE("first-order jets differentiate the whole grammar") {
  const std::string text = "sin(u * v) + exp(u) / (1 + v ^ 2) - sqrt(u + 2) * log(v + 3)";
  ExprPtr e = parse_expression(text, {"u", "v"});
  const double u0 = 0.3, v0 = -0.2, h = 1e-6;

  std::vector<Taylor1> vars = {Taylor1::var(2, 0, u0), Taylor1::var(2, 1, v0)};
  Taylor1 out = eval_expr<Taylor1>(e, vars, 2);

  auto f = [&](double u, double v) { return eval_expr<double>(e, {u, v}, 2); };
  CHECK(out.v == doctest::Approx(f(u0, v0)));
  CHECK(out.g[0] == doctest::Approx((f(u0 + h, v0) - f(u0 - h, v0)) / (2 * h)).epsilon(1e-6));
  CHECK(out.g[1] == doctest::Approx((f(u0, v0 + h) - f(u0, v0 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("second-order jets match finite-difference hessians") {
  const std::string text = "exp(u * v) + cos(u) * v ^ 3 + u / (v + 2)";
  ExprPtr e = parse_expression(text, {"u", "v"});
  const double u0 = 0.7, v0 = 0.4, h = 1e-4;

  std::vector<Taylor2> vars = {Taylor2::var(2, 0, u0), Taylor2::var(2, 1, v0)};
  Taylor2 out = eval_expr<Taylor2>(e, vars, 2);

  auto f = [&](double u, double v) { return eval_expr<double>(e, {u, v}, 2); };
  CHECK(out.v == doctest::Approx(f(u0, v0)));
  double duu = (f(u0 + h, v0) - 2 * f(u0, v0) + f(u0 - h, v0)) / (h * h);
  double dvv = (f(u0, v0 + h) - 2 * f(u0, v0) + f(u0, v0 - h)) / (h * h);
  double duv = (f(u0 + h, v0 + h) - f(u0 + h, v0 - h) - f(u0 - h, v0 + h) + f(u0 - h, v0 - h)) /
               (4 * h * h);
  CHECK(out.hess(0, 0) == doctest::Approx(duu).epsilon(1e-5));
  CHECK(out.hess(1, 1) == doctest::Approx(dvv).epsilon(1e-5));
  CHECK(out.hess(0, 1) == doctest::Approx(duv).epsilon(1e-5));
  CHECK(out.hess(0, 1) == doctest::Approx(out.hess(1, 0)));
}

TEST_CASE("jet arithmetic handles division and negative powers") {
  // d/du (u^-2) = -2 u^-3, second derivative 6 u^-4.
  ExprPtr e = parse_expression("u ^ -2", {"u"});
  std::vector<Taylor2> vars = {Taylor2::var(1, 0, 2.0)};
  Taylor2 out = eval_expr<Taylor2>(e, vars, 1);
  CHECK(out.v == doctest::Approx(0.25));
  CHECK(out.g[0] == doctest::Approx(-0.25));
  CHECK(out.hess(0, 0) == doctest::Approx(0.375));

  Taylor1 zero = Taylor1::constant(1, 0.0);
  Taylor1 one = Taylor1::constant(1, 1.0);
  CHECK_THROWS_AS(one / zero, Error);
  CHECK_THROWS_AS(sqrt(Taylor1::constant(1, -1.0)), Error);
  CHECK_THROWS_AS(log(Taylor1::constant(1, 0.0)), Error);
}
