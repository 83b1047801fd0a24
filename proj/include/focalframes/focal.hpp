#ifndef FOCALFRAMES_FOCAL_HPP
#define FOCALFRAMES_FOCAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "focalframes/multipoly.hpp"
#include "focalframes/variety.hpp"

namespace focalframes {
namespace focal {

/// One factor of a focal polynomial. degree 1 stores the linear form
/// sum_i linear[i] * var_i; degree 2 stores an irreducible quadratic (the
/// image of a conjugate root pair, which has no linear form over the
/// rationals).
template <class K>
struct FocalFactor {
  int degree = 1;
  int multiplicity = 1;
  std::vector<K> linear;    // degree 1: one coefficient per variable
  MultiPoly<K> quadratic;   // degree 2

  MultiPoly<K> as_poly(int nvars) const {
    if (degree == 2) return quadratic;
    MultiPoly<K> p(nvars);
    for (int i = 0; i < nvars; ++i) {
      if (linear[static_cast<std::size_t>(i)] == ScalarTraits<K>::zero()) continue;
      typename MultiPoly<K>::Exps e(static_cast<std::size_t>(nvars), 0u);
      e[static_cast<std::size_t>(i)] = 1u;
      p.add_term(std::move(e), linear[static_cast<std::size_t>(i)]);
    }
    return p;
  }
};

template <class K>
MultiPoly<K> factor_product(const std::vector<FocalFactor<K>>& factors, int nvars) {
  MultiPoly<K> prod = MultiPoly<K>::constant(nvars, ScalarTraits<K>::one());
  for (const auto& f : factors) {
    MultiPoly<K> fp = f.as_poly(nvars);
    for (int k = 0; k < f.multiplicity; ++k) prod *= fp;
  }
  return prod;
}

/// Focal determinant polynomial plus the bookkeeping around it. Variables are
/// leaf coordinates (y0 .. yl) for hypersurface reports and tangential
/// hyperplane coordinates for hypercone reports; var_names records which.
template <class K>
struct FocalReport {
  MultiPoly<K> poly;
  int nvars = 0;
  int degree = 0;
  std::vector<std::string> var_names;
  std::optional<std::vector<K>> regular_witness;
  std::optional<std::vector<FocalFactor<K>>> factorization;
  std::optional<MultiPoly<K>> lowered; // euclidean hypersurface only
};

namespace detail {

template <class K>
void require_valid(const FundamentalTensors<K>& d, double tol) {
  ValidationReport rep = validate_normalized(d, tol);
  if (!rep.pass) {
    std::string msg = "input fails validation:";
    for (const Violation& v : rep.violations) msg += " " + v.invariant;
    fail(Errc::NotValidated, msg);
  }
}

template <class K>
void require_valid(const DegenerateGaussTensors<K>& d, double tol) {
  ValidationReport rep = validate_degenerate_gauss(d, tol);
  if (!rep.pass) {
    std::string msg = "input fails validation:";
    for (const Violation& v : rep.violations) msg += " " + v.invariant;
    fail(Errc::NotValidated, msg);
  }
}

/// det of an r x r matrix whose entries are degree-1 polynomials; Bareiss for
/// exact scalars at small sizes, cofactor expansion otherwise.
template <class K>
MultiPoly<K> pencil_det(const std::vector<std::vector<MultiPoly<K>>>& m) {
  if constexpr (ScalarTraits<K>::exact) {
    if (m.size() <= 6) return det_bareiss(m);
    return det_cofactor(m);
  } else {
    return det_cofactor(m);
  }
}

/// Entries of det(y^0 I + y^a C_a) as polynomials in (y0, y1 .. yl).
template <class K>
std::vector<std::vector<MultiPoly<K>>> hypersurface_pencil(const SmallTensor<K>& c, int r,
                                                           int l) {
  const int nv = l + 1;
  std::vector<std::vector<MultiPoly<K>>> m(static_cast<std::size_t>(r),
                                           std::vector<MultiPoly<K>>(static_cast<std::size_t>(r),
                                                                     MultiPoly<K>(nv)));
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      MultiPoly<K>& e = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
      if (p == q) {
        typename MultiPoly<K>::Exps ex(static_cast<std::size_t>(nv), 0u);
        ex[0] = 1u;
        e.add_term(std::move(ex), ScalarTraits<K>::one());
      }
      for (int a = 0; a < l; ++a) {
        const K& v = c.at({a, p, q});
        if (ScalarTraits<K>::is_zero(v, 0.0)) continue;
        typename MultiPoly<K>::Exps ex(static_cast<std::size_t>(nv), 0u);
        ex[static_cast<std::size_t>(a + 1)] = 1u;
        e.add_term(std::move(ex), v);
      }
    }
  return m;
}

inline std::vector<std::string> leaf_var_names(int l) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(l) + 1);
  for (int i = 0; i <= l; ++i) names.push_back("y" + std::to_string(i));
  return names;
}

/// Deterministic witness search: basis points, then small integer mixes.
template <class K>
std::optional<std::vector<K>> find_witness(const MultiPoly<K>& poly, double tol) {
  if (poly.is_zero()) return std::nullopt;
  const int nv = poly.nvars();
  auto nonzero_at = [&](const std::vector<K>& pt) {
    K v = poly.eval(pt);
    if constexpr (ScalarTraits<K>::exact)
      return !(v == ScalarTraits<K>::zero());
    else
      return std::abs(v) > tol;
  };
  for (int i = 0; i < nv; ++i) {
    std::vector<K> pt(static_cast<std::size_t>(nv), ScalarTraits<K>::zero());
    pt[static_cast<std::size_t>(i)] = ScalarTraits<K>::one();
    if (nonzero_at(pt)) return pt;
  }
  // Mixes (1, k, k^2, ...) hit a nonzero value for some k <= degree * nvars
  // unless the polynomial vanishes on all of them; the bound is generous.
  for (int k = 1; k <= 8 * nv + 8; ++k) {
    std::vector<K> pt(static_cast<std::size_t>(nv), ScalarTraits<K>::zero());
    K x = ScalarTraits<K>::one();
    for (int i = 0; i < nv; ++i) {
      pt[static_cast<std::size_t>(i)] = x;
      x = x * K(k);
    }
    if (nonzero_at(pt)) return pt;
  }
  return std::nullopt;
}

} // namespace detail

/// Focus hypersurface polynomial det(y^0 d^p_q + y^a c^p_{aq}) in the leaf
/// coordinates (y0 .. yl). The (y0)^r coefficient is identically 1. Euclidean
/// data also gets the metric-lowered form det(y^0 g_{pq} - y_a b^a_{pq}) with
/// y_a = g_{ab} y^b, which equals det(g) times the primary polynomial.
template <class K>
FocalReport<K> focus_hypersurface_poly(const FundamentalTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  const int r = d.ranges.r, l = d.ranges.l;
  FocalReport<K> rep;
  rep.nvars = l + 1;
  rep.var_names = detail::leaf_var_names(l);
  rep.poly = detail::pencil_det(detail::hypersurface_pencil(d.c, r, l));
  rep.degree = rep.poly.total_degree();
  std::vector<K> base(static_cast<std::size_t>(l) + 1, ScalarTraits<K>::zero());
  base[0] = ScalarTraits<K>::one();
  rep.regular_witness = std::move(base);

  if (d.ambient == Ambient::Euclidean) {
    const int nv = l + 1;
    std::vector<std::vector<MultiPoly<K>>> m(
        static_cast<std::size_t>(r),
        std::vector<MultiPoly<K>>(static_cast<std::size_t>(r), MultiPoly<K>(nv)));
    const SmallTensor<K>& gT = *d.gT;
    const SmallTensor<K>& gN = *d.gN;
    for (int p = 0; p < r; ++p)
      for (int q = 0; q < r; ++q) {
        MultiPoly<K>& e = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
        if (!ScalarTraits<K>::is_zero(gT(p, q), 0.0)) {
          typename MultiPoly<K>::Exps ex(static_cast<std::size_t>(nv), 0u);
          ex[0] = 1u;
          e.add_term(std::move(ex), gT(p, q));
        }
        for (int bvar = 0; bvar < l; ++bvar) {
          K coef = ScalarTraits<K>::zero();
          for (int a = 0; a < l; ++a) coef += gN(a, bvar) * d.b(a, p, q);
          if (ScalarTraits<K>::is_zero(coef, 0.0)) continue;
          typename MultiPoly<K>::Exps ex(static_cast<std::size_t>(nv), 0u);
          ex[static_cast<std::size_t>(bvar + 1)] = 1u;
          e.add_term(std::move(ex), -coef);
        }
      }
    rep.lowered = detail::pencil_det(m);
  }
  return rep;
}

template <class K>
FocalReport<K> focus_hypersurface_poly(const DegenerateGaussTensors<K>& d,
                                       double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  FocalReport<K> rep;
  rep.nvars = d.ranges.l + 1;
  rep.var_names = detail::leaf_var_names(d.ranges.l);
  rep.poly = detail::pencil_det(detail::hypersurface_pencil(d.cA, d.ranges.r, d.ranges.l));
  rep.degree = rep.poly.total_degree();
  std::vector<K> base(static_cast<std::size_t>(d.ranges.l) + 1, ScalarTraits<K>::zero());
  base[0] = ScalarTraits<K>::one();
  rep.regular_witness = std::move(base);
  return rep;
}

namespace detail {

/// Canonical hypercone scaling: first nonzero coefficient in lexicographic
/// term order becomes 1. The zero polynomial is left alone.
template <class K>
void canonicalize_cone(MultiPoly<K>& p) {
  if (p.is_zero()) return;
  const K& lead = p.terms().begin()->second;
  K inv = ScalarTraits<K>::one() / lead;
  p = p.scaled(inv);
}

/// Raw (uncanonicalized) hypercone determinant. Variables: (xi0 .. xil) for
/// projective normalized data, (xi_a) for affine/euclidean, (xi_alpha) for
/// degenerate-Gauss data.
template <class K>
MultiPoly<K> hypercone_det_raw(const FundamentalTensors<K>& d) {
  const int r = d.ranges.r, l = d.ranges.l;
  const bool projective = d.ambient == Ambient::Projective;
  const int nv = projective ? l + 1 : l;
  std::vector<std::vector<MultiPoly<K>>> m(
      static_cast<std::size_t>(r),
      std::vector<MultiPoly<K>>(static_cast<std::size_t>(r), MultiPoly<K>(nv)));
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      MultiPoly<K>& e = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
      if (projective && !ScalarTraits<K>::is_zero(d.lten(p, q), 0.0)) {
        typename MultiPoly<K>::Exps ex(static_cast<std::size_t>(nv), 0u);
        ex[0] = 1u;
        e.add_term(std::move(ex), d.lten(p, q));
      }
      for (int a = 0; a < l; ++a) {
        const K& v = d.b(a, p, q);
        if (ScalarTraits<K>::is_zero(v, 0.0)) continue;
        typename MultiPoly<K>::Exps ex(static_cast<std::size_t>(nv), 0u);
        ex[static_cast<std::size_t>(projective ? a + 1 : a)] = 1u;
        e.add_term(std::move(ex), v);
      }
    }
  return pencil_det(m);
}

template <class K>
MultiPoly<K> hypercone_det_raw(const DegenerateGaussTensors<K>& d) {
  const int r = d.ranges.r;
  const int nv = *d.ranges.bigN - d.ranges.n;
  std::vector<std::vector<MultiPoly<K>>> m(
      static_cast<std::size_t>(r),
      std::vector<MultiPoly<K>>(static_cast<std::size_t>(r), MultiPoly<K>(nv)));
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      MultiPoly<K>& e = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
      for (int alpha = 0; alpha < nv; ++alpha) {
        const K& v = d.bAlpha(alpha, p, q);
        if (ScalarTraits<K>::is_zero(v, 0.0)) continue;
        typename MultiPoly<K>::Exps ex(static_cast<std::size_t>(nv), 0u);
        ex[static_cast<std::size_t>(alpha)] = 1u;
        e.add_term(std::move(ex), v);
      }
    }
  return pencil_det(m);
}

} // namespace detail

/// Focus hypercone polynomial: det(xi_0 l_{pq} + xi_a b^a_{pq}) projectively,
/// det(xi_a b^a_{pq}) in affine/euclidean ambients, det(xi_alpha b^alpha_{pq})
/// for degenerate-Gauss data. Canonicalized so the lexicographically first
/// nonzero coefficient is 1; the zero polynomial means dual degeneracy.
template <class K>
FocalReport<K> focus_hypercone_poly(const FundamentalTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  const int l = d.ranges.l;
  const bool projective = d.ambient == Ambient::Projective;
  FocalReport<K> rep;
  rep.nvars = projective ? l + 1 : l;
  for (int i = 0; i < rep.nvars; ++i)
    rep.var_names.push_back("xi" + std::to_string(projective ? i : i + 1));
  rep.poly = detail::hypercone_det_raw(d);
  detail::canonicalize_cone(rep.poly);
  rep.degree = rep.poly.total_degree();
  rep.regular_witness = detail::find_witness(rep.poly, tol);
  return rep;
}

template <class K>
FocalReport<K> focus_hypercone_poly(const DegenerateGaussTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  FocalReport<K> rep;
  rep.nvars = *d.ranges.bigN - d.ranges.n;
  for (int i = 0; i < rep.nvars; ++i) rep.var_names.push_back("xi" + std::to_string(i + 1));
  rep.poly = detail::hypercone_det_raw(d);
  detail::canonicalize_cone(rep.poly);
  rep.degree = rep.poly.total_degree();
  rep.regular_witness = detail::find_witness(rep.poly, tol);
  return rep;
}

/// Evaluates the focus-hypersurface polynomial at a leaf point. The point is
/// singular (a focus) exactly when the value vanishes.
template <class K>
std::pair<K, bool> jacobian_at(const FundamentalTensors<K>& d, const std::vector<K>& y,
                               double tol = kDefaultTol) {
  bool all_zero = true;
  for (const K& v : y)
    if (!ScalarTraits<K>::is_zero(v, 0.0)) all_zero = false;
  if (all_zero) fail(Errc::ZeroPoint, "focal point must not be the zero vector");
  FocalReport<K> rep = focus_hypersurface_poly(d, tol);
  K value = rep.poly.eval(y);
  bool regular;
  if constexpr (ScalarTraits<K>::exact)
    regular = !(value == ScalarTraits<K>::zero());
  else
    regular = std::abs(value) > tol;
  return {value, regular};
}

template <class K>
std::pair<K, bool> jacobian_at(const DegenerateGaussTensors<K>& d, const std::vector<K>& y,
                               double tol = kDefaultTol) {
  bool all_zero = true;
  for (const K& v : y)
    if (!ScalarTraits<K>::is_zero(v, 0.0)) all_zero = false;
  if (all_zero) fail(Errc::ZeroPoint, "focal point must not be the zero vector");
  FocalReport<K> rep = focus_hypersurface_poly(d, tol);
  K value = rep.poly.eval(y);
  bool regular;
  if constexpr (ScalarTraits<K>::exact)
    regular = !(value == ScalarTraits<K>::zero());
  else
    regular = std::abs(value) > tol;
  return {value, regular};
}

/// True when the system of second fundamental forms has a nondegenerate
/// member, i.e. the hypercone polynomial is not identically zero.
template <class K>
bool dual_nondegenerate(const DegenerateGaussTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  MultiPoly<K> cone = detail::hypercone_det_raw(d);
  if constexpr (ScalarTraits<K>::exact)
    return !cone.is_zero();
  else
    return !cone.is_zero_within(tol);
}

namespace detail {

template <class K>
int cmp_scalar(const K& a, const K& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

template <class K>
int cmp_poly(const MultiPoly<K>& a, const MultiPoly<K>& b) {
  auto ia = a.terms().begin();
  auto ib = b.terms().begin();
  for (; ia != a.terms().end() && ib != b.terms().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    int c = cmp_scalar(ia->second, ib->second);
    if (c != 0) return c;
  }
  if (ia != a.terms().end()) return 1;
  if (ib != b.terms().end()) return -1;
  return 0;
}

template <class K>
bool factor_less(const FocalFactor<K>& x, const FocalFactor<K>& y) {
  if (x.degree != y.degree) return x.degree < y.degree;
  if (x.degree == 1) {
    for (std::size_t i = 0; i < x.linear.size(); ++i) {
      int c = cmp_scalar(x.linear[i], y.linear[i]);
      if (c != 0) return c < 0;
    }
    return false;
  }
  return cmp_poly(x.quadratic, y.quadratic) < 0;
}

/// Shared precondition for multi-leaf factorization: the family of shape
/// operators must define a flat normal connection, i.e. every product of a
/// second-form slice with a shape operator is symmetric and the shape
/// operators commute. A single-leaf system needs none of this.
template <class K>
void require_factorable(const FundamentalTensors<K>& d, double tol) {
  const int l = d.ranges.l, r = d.ranges.r;
  if (l == 1) return;
  const double gate = ScalarTraits<K>::exact ? 0.0 : tol;
  for (int a = 0; a < l; ++a) {
    Mat<K> ba = d.b_matrix(a);
    for (int b2 = 0; b2 < l; ++b2)
      if (!mat_is_symmetric(mat_mul(ba, d.c_matrix(b2)), gate))
        fail(Errc::NotFactorable,
             "second-form/shape-operator products are not symmetric; the focal "
             "polynomial need not split into hyperplanes");
  }
  for (int a = 0; a < l; ++a)
    for (int b2 = a + 1; b2 < l; ++b2) {
      Mat<K> diff = mat_sub(mat_mul(d.c_matrix(a), d.c_matrix(b2)),
                            mat_mul(d.c_matrix(b2), d.c_matrix(a)));
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          if (!ScalarTraits<K>::is_zero(diff[static_cast<std::size_t>(i)]
                                            [static_cast<std::size_t>(j)],
                                        gate))
            fail(Errc::NotFactorable, "shape operators do not commute");
    }
}

inline UniPoly charpoly_rat(const Mat<Rat>& m) {
  const int d = static_cast<int>(m.size());
  std::vector<std::vector<MultiPoly<Rat>>> pm(
      static_cast<std::size_t>(d),
      std::vector<MultiPoly<Rat>>(static_cast<std::size_t>(d), MultiPoly<Rat>(1)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      MultiPoly<Rat>& e = pm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (i == j) e.add_term({1u}, Rat(1));
      const Rat& v = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (!(v == Rat(0))) e.add_term({0u}, -v);
    }
  MultiPoly<Rat> det = pencil_det(pm);
  UniPoly out(static_cast<std::size_t>(d) + 1, Rat(0));
  for (const auto& [e, c] : det.terms()) out[e[0]] = c;
  uni_trim(out);
  return out;
}

inline Mat<Rat> mat_pow_rat(const Mat<Rat>& m, int e) {
  Mat<Rat> out = mat_identity<Rat>(static_cast<int>(m.size()));
  for (int k = 0; k < e; ++k) out = mat_mul(out, m);
  return out;
}

/// Restriction of c to the invariant subspace spanned by the columns of
/// basis: the unique X with basis * X = c * basis, found via the Gram
/// system because the columns are independent.
inline Mat<Rat> restrict_to_span(const Mat<Rat>& c, const Mat<Rat>& basis) {
  Mat<Rat> bt = mat_transpose(basis);
  Mat<Rat> gram_inv = mat_inverse(mat_mul(bt, basis), 0.0, Errc::RankDeficient);
  return mat_mul(gram_inv, mat_mul(bt, mat_mul(c, basis)));
}

struct RatLeaf {
  Mat<Rat> basis;          // ambient-dim x leaf-dim, columns span
  std::vector<Rat> eigs;   // one eigenvalue per already-processed operator
};

/// Splits r-space into joint generalized eigenspaces of the commuting family.
/// False when some eigenvalue is irrational (or past the root-search cap), in
/// which case no hyperplane factorization over the rationals exists.
inline bool split_rational(const std::vector<Mat<Rat>>& cs, int r, std::vector<RatLeaf>& leaves) {
  leaves.clear();
  RatLeaf whole;
  whole.basis = mat_identity<Rat>(r);
  leaves.push_back(std::move(whole));
  for (const Mat<Rat>& c : cs) {
    std::vector<RatLeaf> next;
    for (const RatLeaf& leaf : leaves) {
      const int d = static_cast<int>(leaf.basis[0].size());
      Mat<Rat> x = restrict_to_span(c, leaf.basis);
      std::vector<std::pair<Rat, int>> roots;
      UniPoly residual;
      if (!uni_rational_roots(charpoly_rat(x), roots, residual)) return false;
      if (uni_deg(residual) > 0) return false;
      int covered = 0;
      for (const auto& [lam, mult] : roots) {
        Mat<Rat> shift = x;
        for (int i = 0; i < d; ++i) shift[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] -= lam;
        std::vector<std::vector<Rat>> ker = kernel_basis(mat_pow_rat(shift, d));
        RatLeaf child;
        child.basis.assign(leaf.basis.size(), std::vector<Rat>(ker.size(), Rat(0)));
        for (std::size_t col = 0; col < ker.size(); ++col)
          for (std::size_t row = 0; row < leaf.basis.size(); ++row) {
            Rat s(0);
            for (int j = 0; j < d; ++j)
              s += leaf.basis[row][static_cast<std::size_t>(j)] * ker[col][static_cast<std::size_t>(j)];
            child.basis[row][col] = s;
          }
        child.eigs = leaf.eigs;
        child.eigs.push_back(lam);
        covered += static_cast<int>(ker.size());
        next.push_back(std::move(child));
      }
      if (covered != d) return false;
    }
    leaves = std::move(next);
  }
  return true;
}

inline std::vector<FocalFactor<Rat>> factor_exact(const FundamentalTensors<Rat>& d) {
  const int r = d.ranges.r, l = d.ranges.l;
  std::vector<FocalFactor<Rat>> out;
  if (l == 1) {
    // Single operator: rational eigenvalues give hyperplanes, conjugate
    // quadratic factors of the characteristic polynomial give irreducible
    // quadratics. Anything of higher degree is an honest refusal.
    std::vector<std::pair<Rat, int>> roots;
    UniPoly residual;
    if (!uni_rational_roots(charpoly_rat(d.c_matrix(0)), roots, residual))
      fail(Errc::NotFactorable, "root search exceeded its integer factorization cap");
    for (const auto& [lam, mult] : roots) {
      FocalFactor<Rat> f;
      f.degree = 1;
      f.multiplicity = mult;
      f.linear = {Rat(1), lam};
      out.push_back(std::move(f));
    }
    if (uni_deg(residual) > 0) {
      std::vector<UniPoly> parts = uni_squarefree(residual);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        int deg = uni_deg(parts[i]);
        if (deg <= 0) continue;
        if (deg != 2)
          fail(Errc::NotFactorable,
               "characteristic polynomial has an irreducible factor of degree " +
                   std::to_string(deg));
        // x^2 + u x + v with conjugate roots mu, bar(mu) turns the pair of
        // hyperplane factors into y0^2 - u y0 y1 + v y1^2.
        Rat u = parts[i][1], v = parts[i][0];
        FocalFactor<Rat> f;
        f.degree = 2;
        f.multiplicity = static_cast<int>(i) + 1;
        MultiPoly<Rat> q(2);
        q.add_term({2u, 0u}, Rat(1));
        q.add_term({1u, 1u}, -u);
        q.add_term({0u, 2u}, v);
        f.quadratic = std::move(q);
        out.push_back(std::move(f));
      }
    }
  } else {
    std::vector<Mat<Rat>> cs;
    cs.reserve(static_cast<std::size_t>(l));
    for (int a = 0; a < l; ++a) cs.push_back(d.c_matrix(a));
    std::vector<RatLeaf> leaves;
    if (!split_rational(cs, r, leaves))
      fail(Errc::NotFactorable,
           "a shape operator has an irrational eigenvalue; no rational "
           "hyperplane factorization exists");
    for (const RatLeaf& leaf : leaves) {
      FocalFactor<Rat> f;
      f.degree = 1;
      f.multiplicity = static_cast<int>(leaf.basis[0].size());
      f.linear.assign(static_cast<std::size_t>(l) + 1, Rat(0));
      f.linear[0] = Rat(1);
      for (int a = 0; a < l; ++a) f.linear[static_cast<std::size_t>(a) + 1] = leaf.eigs[static_cast<std::size_t>(a)];
      out.push_back(std::move(f));
    }
  }
  std::sort(out.begin(), out.end(), factor_less<Rat>);
  return out;
}

inline double eigen_scale(const std::vector<std::complex<double>>& vals) {
  double s = 1.0;
  for (const auto& z : vals) s = std::max(s, std::abs(z));
  return s;
}

inline std::vector<FocalFactor<double>> factor_float_single(const Mat<double>& c, double tol) {
  const int r = static_cast<int>(c.size());
  Eigen::MatrixXd m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success)
    fail(Errc::EigenFailure, "eigenvalue iteration did not converge");
  std::vector<std::complex<double>> vals(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) vals[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  const double imtol = std::max(tol, 1e-10) * eigen_scale(vals);

  std::vector<FocalFactor<double>> out;
  std::vector<std::complex<double>> upper;
  for (const auto& z : vals) {
    if (std::abs(z.imag()) <= imtol) {
      FocalFactor<double> f;
      f.degree = 1;
      f.linear = {1.0, z.real()};
      out.push_back(std::move(f));
    } else if (z.imag() > 0.0) {
      upper.push_back(z);
    }
  }
  for (const auto& z : upper) {
    FocalFactor<double> f;
    f.degree = 2;
    MultiPoly<double> q(2);
    q.add_term({2u, 0u}, 1.0);
    q.add_term({1u, 1u}, 2.0 * z.real());
    q.add_term({0u, 2u}, std::norm(z));
    f.quadratic = std::move(q);
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<FocalFactor<double>> factor_float_joint(const std::vector<Mat<double>>& cs,
                                                           int r, double tol) {
  const int l = static_cast<int>(cs.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
  for (int a = 0; a < l; ++a) {
    // deterministic generic weights keep distinct eigenvalue tuples separated
    double w = 1.0 + std::cos(0.7 * (a + 1));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) t(i, j) += w * cs[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(t, true);
  if (es.info() != Eigen::Success)
    fail(Errc::EigenFailure, "eigenvalue iteration did not converge");
  Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(v);
  if (lu.rank() < r)
    fail(Errc::NotFactorable, "the combined shape operator is defective");

  double scale = 1.0;
  std::vector<std::vector<std::complex<double>>> tuples(
      static_cast<std::size_t>(r), std::vector<std::complex<double>>(static_cast<std::size_t>(l)));
  for (int a = 0; a < l; ++a) {
    Eigen::MatrixXcd ca(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) ca(i, j) = cs[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::MatrixXcd x = lu.solve(ca * v);
    double off = 0.0, diag = 1.0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        if (i == j) diag = std::max(diag, std::abs(x(i, i)));
        else off = std::max(off, std::abs(x(i, j)));
      }
    if (off > 1e-6 * diag)
      fail(Errc::NotFactorable, "shape operators are not simultaneously diagonalizable");
    scale = std::max(scale, diag);
    for (int i = 0; i < r; ++i) tuples[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] = x(i, i);
  }

  const double imtol = std::max(tol, 1e-9) * scale;
  std::vector<bool> used(static_cast<std::size_t>(r), false);
  std::vector<FocalFactor<double>> out;
  for (int i = 0; i < r; ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    bool real = true;
    for (const auto& z : tuples[static_cast<std::size_t>(i)])
      if (std::abs(z.imag()) > imtol) real = false;
    if (real) {
      FocalFactor<double> f;
      f.degree = 1;
      f.linear.assign(static_cast<std::size_t>(l) + 1, 0.0);
      f.linear[0] = 1.0;
      for (int a = 0; a < l; ++a) f.linear[static_cast<std::size_t>(a) + 1] = tuples[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].real();
      out.push_back(std::move(f));
      used[static_cast<std::size_t>(i)] = true;
      continue;
    }
    int mate = -1;
    for (int j = i + 1; j < r && mate < 0; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      double diff = 0.0;
      for (int a = 0; a < l; ++a)
        diff = std::max(diff, std::abs(tuples[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] -
                                       std::conj(tuples[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)])));
      if (diff <= 1e-6 * scale) mate = j;
    }
    if (mate < 0)
      fail(Errc::NotFactorable, "complex eigenvalue tuple has no conjugate partner");
    used[static_cast<std::size_t>(i)] = true;
    used[static_cast<std::size_t>(mate)] = true;
    // (y0 + sum Re la y_a)^2 + (sum Im la y_a)^2
    std::vector<double> re(static_cast<std::size_t>(l) + 1, 0.0), im(static_cast<std::size_t>(l) + 1, 0.0);
    re[0] = 1.0;
    for (int a = 0; a < l; ++a) {
      re[static_cast<std::size_t>(a) + 1] = tuples[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].real();
      im[static_cast<std::size_t>(a) + 1] = tuples[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].imag();
    }
    MultiPoly<double> q(l + 1);
    for (int s = 0; s <= l; ++s)
      for (int u = 0; u <= l; ++u) {
        double coef = re[static_cast<std::size_t>(s)] * re[static_cast<std::size_t>(u)] +
                      im[static_cast<std::size_t>(s)] * im[static_cast<std::size_t>(u)];
        if (coef == 0.0) continue;
        typename MultiPoly<double>::Exps e(static_cast<std::size_t>(l) + 1, 0u);
        e[static_cast<std::size_t>(s)] += 1u;
        e[static_cast<std::size_t>(u)] += 1u;
        q.add_term(std::move(e), coef);
      }
    FocalFactor<double> f;
    f.degree = 2;
    f.quadratic = std::move(q);
    out.push_back(std::move(f));
  }
  return out;
}

/// Merge equal factors into multiplicities; floats merge within a tolerance.
template <class K>
std::vector<FocalFactor<K>> merge_factors(std::vector<FocalFactor<K>> fs, double tol) {
  std::sort(fs.begin(), fs.end(), factor_less<K>);
  std::vector<FocalFactor<K>> out;
  auto same = [&](const FocalFactor<K>& a, const FocalFactor<K>& b) {
    if (a.degree != b.degree) return false;
    if (a.degree == 1) {
      for (std::size_t i = 0; i < a.linear.size(); ++i)
        if (!ScalarTraits<K>::is_zero(a.linear[i] - b.linear[i],
                                      ScalarTraits<K>::exact ? 0.0 : tol))
          return false;
      return true;
    }
    MultiPoly<K> diff = a.quadratic - b.quadratic;
    return ScalarTraits<K>::exact ? diff.is_zero() : diff.is_zero_within(tol);
  };
  for (auto& f : fs) {
    if (!out.empty() && same(out.back(), f))
      out.back().multiplicity += f.multiplicity;
    else
      out.push_back(std::move(f));
  }
  return out;
}

} // namespace detail

/// Factors the focus-hypersurface polynomial into hyperplane (and, for
/// conjugate eigenvalue pairs, irreducible quadratic) components. Requires a
/// single-leaf system or a commuting family with symmetric products; the
/// product of the returned factors equals the polynomial (exactly for
/// rational scalars, coefficient-wise within tolerance for floats).
template <class K>
std::vector<FocalFactor<K>> factor_linear(const FundamentalTensors<K>& d,
                                          double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  detail::require_factorable(d, tol);
  const int l = d.ranges.l;
  std::vector<FocalFactor<K>> out;
  if constexpr (ScalarTraits<K>::exact) {
    out = detail::factor_exact(d);
  } else {
    std::vector<FocalFactor<double>> raw;
    if (l == 1)
      raw = detail::factor_float_single(d.c_matrix(0), tol);
    else {
      std::vector<Mat<double>> cs;
      for (int a = 0; a < l; ++a) cs.push_back(d.c_matrix(a));
      raw = detail::factor_float_joint(cs, d.ranges.r, tol);
    }
    out = detail::merge_factors(std::move(raw), 1e4 * tol);
  }

  FocalReport<K> rep = focus_hypersurface_poly(d, tol);
  MultiPoly<K> prod = factor_product(out, l + 1);
  MultiPoly<K> diff = prod - rep.poly;
  bool ok;
  if constexpr (ScalarTraits<K>::exact) {
    ok = diff.is_zero();
  } else {
    double mag = 1.0;
    for (const auto& [e, c] : rep.poly.terms()) mag = std::max(mag, std::abs(c));
    ok = diff.is_zero_within(1e-6 * mag);
  }
  if (!ok)
    fail(Errc::NotFactorable, "candidate factorization does not reproduce the polynomial");
  return out;
}

/// Hypersurface report with the factorization attached.
template <class K>
FocalReport<K> focus_hypersurface_factored(const FundamentalTensors<K>& d,
                                           double tol = kDefaultTol) {
  FocalReport<K> rep = focus_hypersurface_poly(d, tol);
  rep.factorization = factor_linear(d, tol);
  return rep;
}

/// Slice identity for Euclidean data: the metric-lowered hypersurface
/// polynomial restricted to y0 = 0 equals (-1)^r times the hypercone
/// polynomial under the substitution xi_a = g_{ab} y^b. Both sides are
/// returned uncanonicalized in the leaf variables (y1 .. yl).
template <class K>
struct SliceIdentity {
  bool holds = false;
  MultiPoly<K> restricted_hypersurface;
  MultiPoly<K> hypercone_substituted;
};

template <class K>
SliceIdentity<K> infinity_slice_identity(const FundamentalTensors<K>& d,
                                         double tol = kDefaultTol) {
  if (d.ambient != Ambient::Euclidean)
    fail(Errc::WrongAmbient, "slice identity is a euclidean statement");
  FocalReport<K> hs = focus_hypersurface_poly(d, tol);
  SliceIdentity<K> out;
  out.restricted_hypersurface = hs.lowered->without_var(0);

  MultiPoly<K> cone = detail::hypercone_det_raw(d); // raw scale carries the identity
  Mat<K> g = d.gN_matrix();                          // xi_a = g_{ab} y^b
  out.hypercone_substituted = cone.compose_linear(g, d.ranges.l);

  MultiPoly<K> rhs = out.hypercone_substituted;
  if (d.ranges.r % 2 == 1) rhs = -rhs;
  MultiPoly<K> diff = out.restricted_hypersurface - rhs;
  if constexpr (ScalarTraits<K>::exact)
    out.holds = diff.is_zero();
  else
    out.holds = diff.is_zero_within(64.0 * tol); // slack for the float determinants
  return out;
}

} // namespace focal
} // namespace focalframes

#endif
