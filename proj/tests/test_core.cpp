#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "focalframes/linalg.hpp"
#include "focalframes/multipoly.hpp"
#include "focalframes/tensor.hpp"
#include "focalframes/variety.hpp"

using namespace focalframes;

TEST_CASE("index ranges derive the leaf dimension and reject bad shapes") {
  IndexRanges rg(5, 3);
  CHECK(rg.l == 2);
  CHECK_THROWS_AS(IndexRanges(3, 3), Error);  // codimension zero
  CHECK_THROWS_AS(IndexRanges(2, 3), Error);
  CHECK_THROWS_AS(IndexRanges(4, 2, 4), Error);  // embedding must exceed n
  IndexRanges g(4, 2, 6);
  CHECK(axis_extent(g, Axis::Alpha) == 2);
  CHECK(axis_extent(g, Axis::I) == 3);
}

TEST_CASE("rational scalars parse, print, and stay exact") {
  CHECK(Rat::from_string("3/4") == Rat(3, 4));
  CHECK(Rat::from_string("-2") == Rat(-2));
  CHECK(Rat::from_string("0.25") == Rat(1, 4));
  CHECK(Rat::from_string("-1.5") == Rat(-3, 2));
  CHECK_THROWS_AS(Rat::from_string("x"), Error);
  CHECK_THROWS_AS(Rat(1, 0), Error);

  // A sum that float arithmetic cannot represent exactly.
  Rat acc(0);
  for (int i = 1; i <= 10; ++i) acc += Rat(1, i);
  CHECK(acc == Rat(7381, 2520));
  CHECK(acc.str() == "7381/2520");
}

TEST_CASE("tensors check symmetry declarations and index shapes") {
  IndexRanges rg(4, 2);
  SmallTensor<Rat> b = SmallTensor<Rat>::zeros(rg, {Axis::A, Axis::P, Axis::P});
  b.declare_symmetric(1, 2);
  b(0, 0, 1) = Rat(3);
  CHECK_FALSE(b.symmetries_hold());
  b(0, 1, 0) = Rat(3);
  CHECK(b.symmetries_hold());
  CHECK_THROWS_AS(b.at({0, 0, 5}), Error);
  CHECK_THROWS_AS(b.at({0, 0}), Error);
  CHECK_THROWS_AS(b.declare_symmetric(0, 1), Error);  // A and P classes differ
  b.check_matches(rg);
  IndexRanges other(5, 2);
  CHECK_THROWS_AS(b.check_matches(other), Error);
}

TEST_CASE("contraction sums paired axes and keeps the free ones") {
  IndexRanges rg(4, 2);
  SmallTensor<Rat> m = SmallTensor<Rat>::zeros(rg, {Axis::P, Axis::P});
  SmallTensor<Rat> v = SmallTensor<Rat>::zeros(rg, {Axis::P});
  m(0, 0) = Rat(1);
  m(0, 1) = Rat(2);
  m(1, 0) = Rat(3);
  m(1, 1) = Rat(4);
  v(0) = Rat(5);
  v(1) = Rat(7);
  SmallTensor<Rat> mv = contract(m, v, {{1, 0}});
  CHECK(mv.order() == 1);
  CHECK(mv(0) == Rat(19));  // 1*5 + 2*7
  CHECK(mv(1) == Rat(43));

  SmallTensor<Rat> tr = contract(m, m, {{0, 1}, {1, 0}});
  CHECK(tr.order() == 0);
  CHECK(tr.data()[0] == Rat(1 + 6 + 6 + 16));

  SmallTensor<Rat> a = SmallTensor<Rat>::zeros(rg, {Axis::A});
  CHECK_THROWS_AS(contract(m, a, {{0, 0}}), Error);  // class mismatch
}

TEST_CASE("exact inverse, kernel, and rank behave on small matrices") {
  Mat<Rat> m = {{Rat(2), Rat(1)}, {Rat(7), Rat(4)}};
  Mat<Rat> inv = mat_inverse(m);
  Mat<Rat> id = mat_mul(m, inv);
  CHECK(id[0][0] == Rat(1));
  CHECK(id[0][1] == Rat(0));
  CHECK(id[1][0] == Rat(0));
  CHECK(id[1][1] == Rat(1));

  Mat<Rat> sing = {{Rat(1), Rat(2)}, {Rat(2), Rat(4)}};
  CHECK_THROWS_AS(mat_inverse(sing), Error);
  CHECK(mat_rank(sing) == 1);
  auto ker = kernel_basis(sing);
  REQUIRE(ker.size() == 1);
  CHECK(ker[0][0] * Rat(1) + ker[0][1] * Rat(2) == Rat(0));

  std::vector<Rat> rhs = {Rat(3), Rat(11)};
  std::vector<Rat> x = solve(m, rhs);
  CHECK(m[0][0] * x[0] + m[0][1] * x[1] == rhs[0]);
  CHECK(m[1][0] * x[0] + m[1][1] * x[1] == rhs[1]);
}

TEST_CASE("float inverse pivots by magnitude") {
  Mat<double> m = {{1e-12, 1.0}, {1.0, 1.0}};
  Mat<double> inv = mat_inverse(m, 1e-9);
  Mat<double> id = mat_mul(m, inv);
  CHECK(std::abs(id[0][0] - 1.0) < 1e-9);
  CHECK(std::abs(id[1][1] - 1.0) < 1e-9);
  CHECK(std::abs(id[0][1]) < 1e-9);
  Mat<double> near_sing = {{1.0, 1.0}, {1.0, 1.0 + 1e-13}};
  CHECK_THROWS_AS(mat_inverse(near_sing, 1e-9), Error);
}

TEST_CASE("multivariate arithmetic expands binomials and substitutes") {
  using P = MultiPoly<Rat>;
  P x = P::variable(2, 0), y = P::variable(2, 1);
  P sq = (x + y) * (x + y);
  P expect = x * x + x * y.scaled(Rat(2)) + y * y;
  CHECK(sq == expect);
  CHECK(sq.total_degree() == 2);
  CHECK(sq.eval({Rat(2), Rat(3)}) == Rat(25));

  // x -> u + v, y -> u - v turns (x + y)^2 into 4 u^2.
  Mat<Rat> sub = {{Rat(1), Rat(1)}, {Rat(1), Rat(-1)}};
  P img = sq.compose_linear(sub, 2);
  P u = P::variable(2, 0);
  CHECK(img == (u * u).scaled(Rat(4)));

  CHECK(sq.without_var(1) == x.without_var(1) * x.without_var(1));
  CHECK(divide_exact(sq, x + y) == x + y);
}

TEST_CASE("three determinant routines agree on random polynomial matrices") {
  std::mt19937_64 eng(7);
  auto small = [&](int lo, int hi) {
    return lo + static_cast<int>(eng() % static_cast<unsigned long long>(hi - lo + 1));
  };
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    const int nv = 2;
    std::vector<std::vector<MultiPoly<Rat>>> m(
        n, std::vector<MultiPoly<Rat>>(n, MultiPoly<Rat>(nv)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        MultiPoly<Rat> e = MultiPoly<Rat>::constant(nv, Rat(small(-3, 3)));
        e += MultiPoly<Rat>::variable(nv, 0).scaled(Rat(small(-2, 2)));
        e += MultiPoly<Rat>::variable(nv, 1).scaled(Rat(small(-2, 2)));
        m[i][j] = e;
      }
    MultiPoly<Rat> d1 = det_bareiss(m);
    MultiPoly<Rat> d2 = det_cofactor(m);
    MultiPoly<Rat> d3 = det_permutation(m);
    CHECK(d1 == d2);
    CHECK(d2 == d3);
  }
}

TEST_CASE("fraction-free elimination survives a zero leading column") {
  using P = MultiPoly<Rat>;
  const int nv = 1;
  P zero(nv), one = P::constant(nv, Rat(1)), x = P::variable(nv, 0);
  // First column starts at zero; a row swap is required.
  std::vector<std::vector<P>> m = {{zero, one}, {x, zero}};
  CHECK(det_bareiss(m) == det_permutation(m));
  // A whole zero column must give the zero determinant.
  std::vector<std::vector<P>> z = {{zero, one}, {zero, x}};
  CHECK(det_bareiss(z).is_zero());
}

TEST_CASE("univariate helpers factor multiplicities and rational roots") {
  // (2x - 3)(x + 1)^2 = 2x^3 + x^2 - 4x - 3
  UniPoly p = {Rat(-3), Rat(-4), Rat(1), Rat(2)};
  std::vector<std::pair<Rat, int>> roots;
  UniPoly residual;
  bool complete = uni_rational_roots(p, roots, residual);
  CHECK(complete);
  REQUIRE(roots.size() == 2);
  bool saw_half = false, saw_neg = false;
  for (auto& [r, mult] : roots) {
    if (r == Rat(3, 2)) {
      saw_half = true;
      CHECK(mult == 1);
    }
    if (r == Rat(-1)) {
      saw_neg = true;
      CHECK(mult == 2);
    }
  }
  CHECK(saw_half);
  CHECK(saw_neg);
  CHECK(uni_deg(residual) <= 0);

  // x^2 + 1 has no rational roots; the residual keeps the whole thing.
  UniPoly q = {Rat(1), Rat(0), Rat(1)};
  roots.clear();
  complete = uni_rational_roots(q, roots, residual);
  CHECK(complete);
  CHECK(roots.empty());
  CHECK(uni_deg(residual) == 2);

  auto parts = uni_squarefree({Rat(-3), Rat(-4), Rat(1), Rat(2)});
  // parts[i] collects the factors of exponent i+1: linear for both slots here.
  REQUIRE(parts.size() == 2);
  CHECK(uni_deg(parts[0]) == 1);
  CHECK(uni_deg(parts[1]) == 1);
}

TEST_CASE("polynomial records round trip huge exact coefficients") {
  MultiPoly<Rat> p(3);
  Rat big = Rat::from_string("123456789012345678901234567891/7");
  p.add_term({2, 0, 1}, big);
  p.add_term({0, 0, 0}, Rat(-5, 3));
  p.add_term({1, 1, 1}, Rat(1));

  std::vector<PolyRecord> recs = poly_records(p);
  REQUIRE(recs.size() == 3);
  // Records come out in lexicographic exponent order.
  CHECK(recs[0].exps == std::vector<unsigned>{0, 0, 0});
  CHECK(recs[2].exps == std::vector<unsigned>{2, 0, 1});
  CHECK(recs[2].num == "123456789012345678901234567891");
  CHECK(recs[2].den == "7");

  MultiPoly<Rat> back = poly_from_records(3, recs);
  CHECK(back == p);

  PolyRecord bad{{0, 0, 0}, "12x", "1"};
  CHECK_THROWS_AS(poly_from_records(3, {bad}), Error);
  PolyRecord zero_den{{0, 0, 0}, "1", "0"};
  CHECK_THROWS_AS(poly_from_records(3, {zero_den}), Error);
}

TEST_CASE("random instances validate for every ambient and depend on the seed") {
  IndexRanges rg(4, 2);
  for (Ambient amb : {Ambient::Projective, Ambient::Affine, Ambient::Euclidean}) {
    FundamentalTensors<Rat> d = random_instance(rg, amb, 42);
    CHECK(validate_normalized(d).pass);
    FundamentalTensors<Rat> same = random_instance(rg, amb, 42);
    CHECK(same.b.data() == d.b.data());
    FundamentalTensors<Rat> other = random_instance(rg, amb, 43);
    CHECK(other.b.data() != d.b.data());
  }
}

TEST_CASE("validation flags specific broken invariants") {
  IndexRanges rg(4, 2);
  FundamentalTensors<Rat> d = random_instance(rg, Ambient::Affine, 3);
  d.b.at({0, 0, 1}) += Rat(1);  // break b-symmetry
  ValidationReport rep = validate_normalized(d);
  CHECK_FALSE(rep.pass);
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations[0].invariant == "b-symmetry");

  FundamentalTensors<Rat> e = random_instance(rg, Ambient::Affine, 3);
  e.lten(0, 0) = Rat(1);
  rep = validate_normalized(e);
  CHECK_FALSE(rep.pass);
  CHECK(rep.violations[0].invariant == "l-vanishes");

  FundamentalTensors<Rat> f = random_instance(rg, Ambient::Euclidean, 3);
  f.c.at({0, 0, 0}) += Rat(1, 2);
  rep = validate_normalized(f);
  CHECK_FALSE(rep.pass);
  CHECK(rep.violations[0].invariant == "weingarten-identity");
}

TEST_CASE("degenerate-Gauss validation checks the product symmetry") {
  IndexRanges rg(4, 2, 6);
  DegenerateGaussTensors<Rat> d = DegenerateGaussTensors<Rat>::make_zero(rg);
  for (int alpha = 0; alpha < 2; ++alpha)
    for (int p = 0; p < 2; ++p) d.bAlpha.at({alpha, p, p}) = Rat(alpha + 1);
  for (int a = 0; a < 2; ++a)
    for (int p = 0; p < 2; ++p) d.cA.at({a, p, p}) = Rat(a + 2);
  CHECK(validate_degenerate_gauss(d).pass);

  d.cA.at({0, 0, 1}) = Rat(5);  // B diagonal with distinct entries: BC asymmetric
  d.bAlpha.at({0, 0, 0}) = Rat(1);
  d.bAlpha.at({0, 1, 1}) = Rat(2);
  ValidationReport rep = validate_degenerate_gauss(d);
  CHECK_FALSE(rep.pass);
  bool saw = false;
  for (const auto& v : rep.violations)
    if (v.invariant == "gauss-compatibility") saw = true;
  CHECK(saw);
}
