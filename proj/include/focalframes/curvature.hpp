#ifndef FOCALFRAMES_CURVATURE_HPP
#define FOCALFRAMES_CURVATURE_HPP

#include <optional>
#include <utility>
#include <vector>

#include "focalframes/variety.hpp"

namespace focalframes {
namespace curvature {

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
bool lten_vanishes(const FundamentalTensors<K>& d, double tol) {
  return d.lten.all_zero(ScalarTraits<K>::exact ? 0.0 : tol);
}
} // namespace detail

/// Curvature tensor of the induced tangential connection:
///   R^p_{qst} = l_{qs} d^p_t + b^a_{qs} c^p_{at} - l_{qt} d^p_s - b^a_{qt} c^p_{as}
/// returned with index order (p, q, s, t). Affine and Euclidean inputs have
/// l = 0, which reduces the formula to its pure (b, c) part.
template <class K>
SmallTensor<K> tangential_curvature(const FundamentalTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  const int r = d.ranges.r, l = d.ranges.l;
  SmallTensor<K> R = SmallTensor<K>::zeros(d.ranges, {Axis::P, Axis::P, Axis::P, Axis::P});
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q)
      for (int s = 0; s < r; ++s)
        for (int t = 0; t < r; ++t) {
          K v = ScalarTraits<K>::zero();
          if (p == t) v += d.lten(q, s);
          if (p == s) v -= d.lten(q, t);
          for (int a = 0; a < l; ++a)
            v += d.b(a, q, s) * d.c(a, p, t) - d.b(a, q, t) * d.c(a, p, s);
          R(p, q, s, t) = v;
        }
  return R;
}

/// Euclidean lowered curvature R_{pqst} = g_{ac}(b^a_{ps} b^c_{qt} - b^a_{pt} b^c_{qs}).
template <class K>
SmallTensor<K> lowered_curvature(const FundamentalTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  if (d.ambient != Ambient::Euclidean)
    fail(Errc::WrongAmbient, "lowered curvature needs euclidean data");
  const int r = d.ranges.r, l = d.ranges.l;
  const SmallTensor<K>& gN = *d.gN;
  SmallTensor<K> R = SmallTensor<K>::zeros(d.ranges, {Axis::P, Axis::P, Axis::P, Axis::P});
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q)
      for (int s = 0; s < r; ++s)
        for (int t = 0; t < r; ++t) {
          K v = ScalarTraits<K>::zero();
          for (int a = 0; a < l; ++a)
            for (int cc = 0; cc < l; ++cc)
              v += gN(a, cc) * (d.b(a, p, s) * d.b(cc, q, t) - d.b(a, p, t) * d.b(cc, q, s));
          R(p, q, s, t) = v;
        }
  return R;
}

/// Curvature tensor of the normal connection:
///   R^a_{bst} = c^p_{bs} b^a_{pt} - c^p_{bt} b^a_{ps}
/// returned with index order (a, b, s, t).
template <class K>
SmallTensor<K> normal_curvature(const FundamentalTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  const int r = d.ranges.r, l = d.ranges.l;
  SmallTensor<K> R = SmallTensor<K>::zeros(d.ranges, {Axis::A, Axis::A, Axis::P, Axis::P});
  for (int a = 0; a < l; ++a)
    for (int bb = 0; bb < l; ++bb)
      for (int s = 0; s < r; ++s)
        for (int t = 0; t < r; ++t) {
          K v = ScalarTraits<K>::zero();
          for (int p = 0; p < r; ++p)
            v += d.c(bb, p, s) * d.b(a, p, t) - d.c(bb, p, t) * d.b(a, p, s);
          R(a, bb, s, t) = v;
        }
  return R;
}

/// Ricci-type tensors of both connections, computed for affine or Euclidean
/// normalizations:
///   R_{st}       = b^a_{ps} c^p_{at} - b^a_{pt} c^p_{as}
///   Rtilde_{st}  = b^a_{pt} c^p_{as} - b^a_{ps} c^p_{at}
/// Projective data is accepted only when l vanishes identically; otherwise
/// these identities are outside their hypotheses.
template <class K>
std::pair<SmallTensor<K>, SmallTensor<K>> ricci_pair(const FundamentalTensors<K>& d,
                                                     double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  if (d.ambient == Ambient::Projective && !detail::lten_vanishes(d, tol))
    fail(Errc::WrongAmbient, "ricci pair needs an affine normalization (l must vanish)");
  const int r = d.ranges.r, l = d.ranges.l;
  SmallTensor<K> ric = SmallTensor<K>::zeros(d.ranges, {Axis::P, Axis::P});
  SmallTensor<K> ricN = SmallTensor<K>::zeros(d.ranges, {Axis::P, Axis::P});
  for (int s = 0; s < r; ++s)
    for (int t = 0; t < r; ++t) {
      K v = ScalarTraits<K>::zero();
      for (int a = 0; a < l; ++a)
        for (int p = 0; p < r; ++p)
          v += d.b(a, p, s) * d.c(a, p, t) - d.b(a, p, t) * d.c(a, p, s);
      ric(s, t) = v;
      ricN(s, t) = -v;
    }
  return {std::move(ric), std::move(ricN)};
}

struct FlatnessReport {
  bool tangential_flat = false;
  bool normal_flat = false;
  bool condition_product_symmetric = false; // every B^a C_b symmetric
};

/// Flatness flags for both connections plus the product-symmetry condition
/// that characterizes a flat normal connection. The two routes to the normal
/// flag are computed independently and must agree; a disagreement can only
/// come from a tolerance straddling the boundary and is rejected.
template <class K>
FlatnessReport flatness_report(const FundamentalTensors<K>& d, double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  FlatnessReport rep;
  const double zero_tol = ScalarTraits<K>::exact ? 0.0 : tol;
  rep.tangential_flat = tangential_curvature(d, tol).all_zero(zero_tol);
  rep.normal_flat = normal_curvature(d, tol).all_zero(zero_tol);

  rep.condition_product_symmetric = true;
  for (int a = 0; a < d.ranges.l && rep.condition_product_symmetric; ++a) {
    Mat<K> B = d.b_matrix(a);
    for (int bb = 0; bb < d.ranges.l; ++bb) {
      // (B^a C_b)_{ts} = sum_p b^a_{tp} c^p_{bs}; with b symmetric this is the
      // displaced product whose symmetry is equivalent to flat gamma_n.
      Mat<K> H = mat_mul(B, d.c_matrix(bb));
      if (!mat_is_symmetric(H, zero_tol)) {
        rep.condition_product_symmetric = false;
        break;
      }
    }
  }
  if (rep.normal_flat != rep.condition_product_symmetric)
    fail(Errc::DomainError, "tolerance straddles the normal-flatness boundary");
  return rep;
}

enum class NormalizationTag { Central, Trivial, CentralAffineAtanasyan, General };

inline const char* normalization_name(NormalizationTag t) {
  switch (t) {
    case NormalizationTag::Central: return "central";
    case NormalizationTag::Trivial: return "trivial";
    case NormalizationTag::CentralAffineAtanasyan: return "central-affine-atanasyan";
    case NormalizationTag::General: return "general";
  }
  return "unknown";
}

template <class K>
struct NormalizationClass {
  NormalizationTag tag = NormalizationTag::General;
  std::optional<std::vector<K>> witness; // the common factors c_a, one per leaf index
};

/// Classification of the normalization.
///   trivial:  affine ambient with c = 0 (all first normals parallel)
///   central:  l = 0 and c = 0 (first normals form a bundle)
///   central-affine-atanasyan: affine ambient with C_a = c_a I for a covector c_a
///   general:  anything else.
/// An affine instance with c = 0 satisfies both of the first two; the affine
/// reading (trivial) wins because parallelism is the sharper statement there.
template <class K>
NormalizationClass<K> classify_normalization(const FundamentalTensors<K>& d,
                                             double tol = kDefaultTol) {
  detail::require_valid(d, tol);
  const double zero_tol = ScalarTraits<K>::exact ? 0.0 : tol;
  NormalizationClass<K> out;
  const bool c_zero = d.c.all_zero(zero_tol);
  const bool l_zero = detail::lten_vanishes(d, tol);

  if (d.ambient == Ambient::Affine && c_zero) {
    out.tag = NormalizationTag::Trivial;
    return out;
  }
  if (l_zero && c_zero) {
    out.tag = NormalizationTag::Central;
    return out;
  }
  if (d.ambient == Ambient::Affine) {
    std::vector<K> witness;
    bool proportional = true;
    for (int a = 0; a < d.ranges.l && proportional; ++a) {
      K ca = d.c(a, 0, 0);
      for (int p = 0; p < d.ranges.r && proportional; ++p)
        for (int q = 0; q < d.ranges.r && proportional; ++q) {
          K expect = (p == q) ? ca : ScalarTraits<K>::zero();
          if (!focalframes::detail::near_zero<K>(d.c(a, p, q) - expect, zero_tol))
            proportional = false;
        }
      witness.push_back(ca);
    }
    if (proportional) {
      out.tag = NormalizationTag::CentralAffineAtanasyan;
      out.witness = std::move(witness);
      return out;
    }
  }
  out.tag = NormalizationTag::General;
  return out;
}

namespace detail {
template <class K>
K displaced_form(const SmallTensor<K>& bten, const SmallTensor<K>& cten, int nforms, int r,
                 int l, const std::vector<K>& xi, const std::vector<K>& w,
                 const std::optional<std::pair<K, std::vector<K>>>& generator) {
  if (static_cast<int>(xi.size()) != nforms)
    fail(Errc::ShapeMismatch, "hyperplane coefficient count mismatch");
  if (static_cast<int>(w.size()) != r) fail(Errc::ShapeMismatch, "tangent direction length mismatch");

  // M^s_q = x^0 d^s_q + x^a c^s_{aq}; the base-point form is M = I.
  Mat<K> M = mat_identity<K>(r);
  if (generator) {
    const auto& [x0, xa] = *generator;
    if (static_cast<int>(xa.size()) != l)
      fail(Errc::ShapeMismatch, "generator point leaf coordinate count mismatch");
    for (int s = 0; s < r; ++s)
      for (int q = 0; q < r; ++q) {
        K v = (s == q) ? x0 : ScalarTraits<K>::zero();
        for (int a = 0; a < l; ++a) v += xa[a] * cten.at({a, s, q});
        M[s][q] = v;
      }
  }

  K total = ScalarTraits<K>::zero();
  for (int f = 0; f < nforms; ++f) {
    if (ScalarTraits<K>::is_zero(xi[f], 0.0)) continue;
    for (int p = 0; p < r; ++p)
      for (int s = 0; s < r; ++s)
        for (int q = 0; q < r; ++q) total += xi[f] * bten.at({f, p, s}) * M[s][q] * w[p] * w[q];
  }
  return total;
}
} // namespace detail

/// Second fundamental form xi_a b^a_{pq} w^p w^q, optionally displaced to a
/// generator point (x^0, x^a) through the substitution
/// b^a_{ps} (d^s_q x^0 + c^s_{bq} x^b).
template <class K>
K second_fundamental_form(const FundamentalTensors<K>& d, const std::vector<K>& xi,
                          const std::vector<K>& w,
                          const std::optional<std::pair<K, std::vector<K>>>& generator = {}) {
  return detail::displaced_form(d.b, d.c, d.ranges.l, d.ranges.r, d.ranges.l, xi, w, generator);
}

template <class K>
K second_fundamental_form(const DegenerateGaussTensors<K>& d, const std::vector<K>& xi,
                          const std::vector<K>& w,
                          const std::optional<std::pair<K, std::vector<K>>>& generator = {}) {
  return detail::displaced_form(d.bAlpha, d.cA, *d.ranges.bigN - d.ranges.n, d.ranges.r,
                                d.ranges.l, xi, w, generator);
}

} // namespace curvature
} // namespace focalframes

#endif
