#ifndef FOCALFRAMES_VARIETY_HPP
#define FOCALFRAMES_VARIETY_HPP

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "focalframes/linalg.hpp"
#include "focalframes/tensor.hpp"

namespace focalframes {

/// Tensor family of a normalized variety.
///
/// Storage conventions (0-based):
///   b(a, p, q)    = b^a_{pq}, symmetric in (p, q)
///   c(a, p, q)    = c^p_{aq}; the first tensor index after a is the upper
///                   index, so the a-slice of c is the matrix C_a with row p,
///                   column q
///   lten(p, q)    = l_{pq}
///   gN(a, b), gT(p, q) = metrics, Euclidean ambient only.
template <class K>
struct FundamentalTensors {
  IndexRanges ranges;
  Ambient ambient = Ambient::Projective;
  SmallTensor<K> b;
  SmallTensor<K> c;
  SmallTensor<K> lten;
  std::optional<SmallTensor<K>> gN;
  std::optional<SmallTensor<K>> gT;

  static FundamentalTensors make_zero(const IndexRanges& rg, Ambient amb) {
    FundamentalTensors d;
    d.ranges = rg;
    d.ambient = amb;
    d.b = SmallTensor<K>::zeros(rg, {Axis::A, Axis::P, Axis::P});
    d.b.declare_symmetric(1, 2);
    d.c = SmallTensor<K>::zeros(rg, {Axis::A, Axis::P, Axis::P});
    d.lten = SmallTensor<K>::zeros(rg, {Axis::P, Axis::P});
    d.lten.declare_symmetric(0, 1);
    if (amb == Ambient::Euclidean) {
      SmallTensor<K> gn = SmallTensor<K>::zeros(rg, {Axis::A, Axis::A});
      SmallTensor<K> gt = SmallTensor<K>::zeros(rg, {Axis::P, Axis::P});
      for (int a = 0; a < rg.l; ++a) gn(a, a) = ScalarTraits<K>::one();
      for (int p = 0; p < rg.r; ++p) gt(p, p) = ScalarTraits<K>::one();
      gn.declare_symmetric(0, 1);
      gt.declare_symmetric(0, 1);
      d.gN = std::move(gn);
      d.gT = std::move(gt);
    }
    return d;
  }

  Mat<K> c_matrix(int a) const {
    Mat<K> m = mat_zero<K>(ranges.r, ranges.r);
    for (int p = 0; p < ranges.r; ++p)
      for (int q = 0; q < ranges.r; ++q) m[p][q] = c(a, p, q);
    return m;
  }

  Mat<K> b_matrix(int a) const {
    Mat<K> m = mat_zero<K>(ranges.r, ranges.r);
    for (int p = 0; p < ranges.r; ++p)
      for (int q = 0; q < ranges.r; ++q) m[p][q] = b(a, p, q);
    return m;
  }

  Mat<K> gT_matrix() const {
    Mat<K> m = mat_zero<K>(ranges.r, ranges.r);
    for (int p = 0; p < ranges.r; ++p)
      for (int q = 0; q < ranges.r; ++q) m[p][q] = (*gT)(p, q);
    return m;
  }

  Mat<K> gN_matrix() const {
    Mat<K> m = mat_zero<K>(ranges.l, ranges.l);
    for (int a = 0; a < ranges.l; ++a)
      for (int bb = 0; bb < ranges.l; ++bb) m[a][bb] = (*gN)(a, bb);
    return m;
  }
};

/// Matrix pair of a variety with degenerate Gauss map. The identity matrix
/// for the base point (i = 0) is implicit and never stored.
///
///   bAlpha(alpha, p, q) = b^alpha_{pq}, symmetric in (p, q)
///   cA(a, p, q)         = c^p_{aq} (row p, column q within each a-slice).
template <class K>
struct DegenerateGaussTensors {
  IndexRanges ranges; // requires bigN
  SmallTensor<K> bAlpha;
  SmallTensor<K> cA;

  static DegenerateGaussTensors make_zero(const IndexRanges& rg) {
    if (!rg.bigN) fail(Errc::ShapeMismatch, "degenerate-Gauss data needs an embedding dimension");
    DegenerateGaussTensors d;
    d.ranges = rg;
    d.bAlpha = SmallTensor<K>::zeros(rg, {Axis::Alpha, Axis::P, Axis::P});
    d.bAlpha.declare_symmetric(1, 2);
    d.cA = SmallTensor<K>::zeros(rg, {Axis::A, Axis::P, Axis::P});
    return d;
  }

  Mat<K> b_matrix(int alpha) const {
    Mat<K> m = mat_zero<K>(ranges.r, ranges.r);
    for (int p = 0; p < ranges.r; ++p)
      for (int q = 0; q < ranges.r; ++q) m[p][q] = bAlpha(alpha, p, q);
    return m;
  }

  Mat<K> c_matrix(int a) const {
    Mat<K> m = mat_zero<K>(ranges.r, ranges.r);
    for (int p = 0; p < ranges.r; ++p)
      for (int q = 0; q < ranges.r; ++q) m[p][q] = cA(a, p, q);
    return m;
  }
};

/// One violated invariant: a stable machine-readable name plus detail text.
/// Names in use: "b-symmetry", "l-vanishes", "metric-symmetry",
/// "weingarten-identity", "gauss-compatibility".
struct Violation {
  std::string invariant;
  std::string detail;
};

struct ValidationReport {
  bool pass = true;
  std::vector<Violation> violations;

  void flag(std::string invariant, std::string detail) {
    pass = false;
    violations.push_back({std::move(invariant), std::move(detail)});
  }
};

namespace detail {
template <class K>
bool near_zero(const K& v, double tol) {
  if constexpr (ScalarTraits<K>::exact)
    return v == ScalarTraits<K>::zero();
  else
    return ScalarTraits<K>::is_zero(v, tol);
}
} // namespace detail

/// Checks the invariants of a normalized-variety tensor family: b symmetric
/// in its lower pair; l vanishes for affine and Euclidean ambients; Euclidean
/// metrics symmetric and nondegenerate with c determined by b through the
/// Weingarten relation c^p_{as} = -g^{pq} g_{ac} b^c_{qs}.
template <class K>
ValidationReport validate_normalized(const FundamentalTensors<K>& d, double tol = kDefaultTol) {
  d.ranges.check();
  d.b.check_matches(d.ranges);
  d.c.check_matches(d.ranges);
  d.lten.check_matches(d.ranges);
  if (d.b.order() != 3 || d.c.order() != 3 || d.lten.order() != 2)
    fail(Errc::ShapeMismatch, "tensor order is wrong for a normalized variety");
  if (d.ambient == Ambient::Euclidean) {
    if (!d.gN || !d.gT)
      fail(Errc::ShapeMismatch, "euclidean data needs both metrics");
    d.gN->check_matches(d.ranges);
    d.gT->check_matches(d.ranges);
  }

  ValidationReport rep;
  const int r = d.ranges.r, l = d.ranges.l;

  bool b_sym = true;
  for (int a = 0; a < l && b_sym; ++a)
    for (int p = 0; p < r && b_sym; ++p)
      for (int q = p + 1; q < r && b_sym; ++q)
        if (!detail::near_zero<K>(d.b(a, p, q) - d.b(a, q, p), tol)) {
          rep.flag("b-symmetry", "b(" + std::to_string(a) + "," + std::to_string(p) + "," +
                                     std::to_string(q) + ") differs from its transpose");
          b_sym = false;
        }

  if (d.ambient == Ambient::Affine || d.ambient == Ambient::Euclidean) {
    bool l_ok = true;
    for (int p = 0; p < r && l_ok; ++p)
      for (int q = 0; q < r && l_ok; ++q)
        if (!detail::near_zero<K>(d.lten(p, q), tol)) {
          rep.flag("l-vanishes", "l(" + std::to_string(p) + "," + std::to_string(q) +
                                     ") must vanish under an affine or euclidean ambient");
          l_ok = false;
        }
  }

  if (d.ambient == Ambient::Euclidean) {
    if (!d.gN->symmetries_hold(tol) || !d.gT->symmetries_hold(tol))
      rep.flag("metric-symmetry", "a metric tensor is not symmetric");

    // Nondegeneracy: inversion throws SingularMetric on failure.
    Mat<K> gt_inv = mat_inverse(d.gT_matrix(), tol);
    mat_inverse(d.gN_matrix(), tol);

    const SmallTensor<K>& gN = *d.gN;
    for (int a = 0; a < l; ++a)
      for (int p = 0; p < r; ++p)
        for (int s = 0; s < r; ++s) {
          K expect = ScalarTraits<K>::zero();
          for (int q = 0; q < r; ++q)
            for (int cidx = 0; cidx < l; ++cidx)
              expect += gt_inv[p][q] * gN(a, cidx) * d.b(cidx, q, s);
          if (!detail::near_zero<K>(d.c(a, p, s) + expect, tol)) {
            rep.flag("weingarten-identity",
                     "c(" + std::to_string(a) + "," + std::to_string(p) + "," +
                         std::to_string(s) + ") is not determined by the metrics and b");
            return rep;
          }
        }
  }
  return rep;
}

/// Checks the compatibility relations of a degenerate-Gauss pair: every
/// product B^alpha C_i must be symmetric, where i runs over the implicit
/// identity (i = 0) and each leaf index a.
template <class K>
ValidationReport validate_degenerate_gauss(const DegenerateGaussTensors<K>& d,
                                           double tol = kDefaultTol) {
  d.ranges.check();
  if (!d.ranges.bigN) fail(Errc::ShapeMismatch, "degenerate-Gauss data needs an embedding dimension");
  d.bAlpha.check_matches(d.ranges);
  d.cA.check_matches(d.ranges);

  ValidationReport rep;
  const int nalpha = *d.ranges.bigN - d.ranges.n;

  for (int alpha = 0; alpha < nalpha; ++alpha) {
    Mat<K> B = d.b_matrix(alpha);
    if (!mat_is_symmetric(B, tol)) {
      rep.flag("b-symmetry", "B^" + std::to_string(alpha) + " is not symmetric");
      continue;
    }
    for (int a = 0; a < d.ranges.l; ++a) {
      Mat<K> H = mat_mul(B, d.c_matrix(a));
      if (!mat_is_symmetric(H, tol))
        rep.flag("gauss-compatibility", "B^" + std::to_string(alpha) + " C_" + std::to_string(a) +
                                            " is not symmetric");
    }
  }
  return rep;
}

namespace detail {

/// Deterministic small-rational source. Raw engine output is reduced by
/// modulus so the stream does not depend on distribution implementations.
class RatSource {
public:
  explicit RatSource(unsigned long long seed) : eng_(seed) {}

  // Uniform-ish integer in [lo, hi].
  long pick(long lo, long hi) {
    unsigned long long span = static_cast<unsigned long long>(hi - lo + 1);
    return lo + static_cast<long>(eng_() % span);
  }

  Rat small() { return Rat(static_cast<int>(pick(-4, 4)), static_cast<int>(pick(1, 3))); }
  Rat small_nonneg() { return Rat(static_cast<int>(pick(0, 4)), static_cast<int>(pick(1, 3))); }

private:
  std::mt19937_64 eng_;
};

inline SmallTensor<Rat> random_symmetric_slices(RatSource& src, const IndexRanges& rg,
                                                Axis lead) {
  SmallTensor<Rat> t = SmallTensor<Rat>::zeros(rg, {lead, Axis::P, Axis::P});
  t.declare_symmetric(1, 2);
  const int slices = axis_extent(rg, lead);
  for (int a = 0; a < slices; ++a)
    for (int p = 0; p < rg.r; ++p)
      for (int q = p; q < rg.r; ++q) {
        Rat v = src.small();
        t.at({a, p, q}) = v;
        t.at({a, q, p}) = v;
      }
  return t;
}

inline Mat<Rat> random_positive_definite(RatSource& src, int n) {
  // A^T A + I with small integer A: symmetric, positive definite, exact.
  Mat<Rat> a = mat_zero<Rat>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = Rat(static_cast<int>(src.pick(-2, 2)));
  Mat<Rat> g = mat_mul(mat_transpose(a), a);
  for (int i = 0; i < n; ++i) g[i][i] += Rat(1);
  return g;
}

} // namespace detail

/// Seed-deterministic normalized-variety instance that always passes
/// validate_normalized. Euclidean instances synthesize c from random b and
/// random positive-definite metrics through the Weingarten relation.
inline FundamentalTensors<Rat> random_instance(const IndexRanges& rg, Ambient amb,
                                               unsigned long long seed) {
  rg.check();
  detail::RatSource src(seed);
  FundamentalTensors<Rat> d = FundamentalTensors<Rat>::make_zero(rg, amb);
  d.b = detail::random_symmetric_slices(src, rg, Axis::A);

  if (amb == Ambient::Projective) {
    for (int p = 0; p < rg.r; ++p)
      for (int q = p; q < rg.r; ++q) {
        Rat v = src.small();
        d.lten(p, q) = v;
        d.lten(q, p) = v;
      }
    for (int a = 0; a < rg.l; ++a)
      for (int p = 0; p < rg.r; ++p)
        for (int q = 0; q < rg.r; ++q) d.c(a, p, q) = src.small();
  } else if (amb == Ambient::Affine) {
    for (int a = 0; a < rg.l; ++a)
      for (int p = 0; p < rg.r; ++p)
        for (int q = 0; q < rg.r; ++q) d.c(a, p, q) = src.small();
  } else {
    Mat<Rat> gt = detail::random_positive_definite(src, rg.r);
    Mat<Rat> gn = detail::random_positive_definite(src, rg.l);
    SmallTensor<Rat> gT = SmallTensor<Rat>::zeros(rg, {Axis::P, Axis::P});
    SmallTensor<Rat> gN = SmallTensor<Rat>::zeros(rg, {Axis::A, Axis::A});
    for (int p = 0; p < rg.r; ++p)
      for (int q = 0; q < rg.r; ++q) gT(p, q) = gt[p][q];
    for (int a = 0; a < rg.l; ++a)
      for (int bb = 0; bb < rg.l; ++bb) gN(a, bb) = gn[a][bb];
    gT.declare_symmetric(0, 1);
    gN.declare_symmetric(0, 1);
    d.gT = std::move(gT);
    d.gN = std::move(gN);

    Mat<Rat> gt_inv = mat_inverse(gt);
    for (int a = 0; a < rg.l; ++a)
      for (int p = 0; p < rg.r; ++p)
        for (int s = 0; s < rg.r; ++s) {
          Rat v(0);
          for (int q = 0; q < rg.r; ++q)
            for (int cc = 0; cc < rg.l; ++cc) v += gt_inv[p][q] * gn[a][cc] * d.b(cc, q, s);
          d.c(a, p, s) = -v;
        }
  }
  return d;
}

template <class K>
FundamentalTensors<double> to_float(const FundamentalTensors<K>& d) {
  FundamentalTensors<double> out;
  out.ranges = d.ranges;
  out.ambient = d.ambient;
  out.b = d.b.to_double();
  out.c = d.c.to_double();
  out.lten = d.lten.to_double();
  if (d.gN) out.gN = d.gN->to_double();
  if (d.gT) out.gT = d.gT->to_double();
  return out;
}

template <class K>
DegenerateGaussTensors<double> to_float(const DegenerateGaussTensors<K>& d) {
  DegenerateGaussTensors<double> out;
  out.ranges = d.ranges;
  out.bAlpha = d.bAlpha.to_double();
  out.cA = d.cA.to_double();
  return out;
}

} // namespace focalframes

#endif
