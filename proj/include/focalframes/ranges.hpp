#ifndef FOCALFRAMES_RANGES_HPP
#define FOCALFRAMES_RANGES_HPP

#include <optional>
#include <string>

#include "focalframes/errors.hpp"

namespace focalframes {

/// Default comparison tolerance for float-mode checks. Second-order jet
/// derivatives are exact to roundoff, so 1e-9 leaves a wide margin.
inline constexpr double kDefaultTol = 1e-9;

enum class Ambient { Projective, Affine, Euclidean };

const char* ambient_name(Ambient a);
Ambient ambient_from_name(const std::string& s);

/// Dimension bookkeeping shared by both data models.
///
/// Normalized-variety data: a variety of dimension r inside an ambient space
/// of dimension n, with first normals of dimension l = n - r.
/// Degenerate-Gauss data: a variety of dimension n with Gauss rank r and
/// plane generators of dimension l = n - r, embedded in a space of dimension
/// bigN.
///
/// Index classes are stored 0-based: leaf/normal indices a in [0, l),
/// tangential indices p in [0, r), hyperplane indices alpha in [0, bigN - n),
/// point-augmented indices i in [0, 1 + l) where i = 0 is the base point.
struct IndexRanges {
  int n = 0;
  int r = 0;
  int l = 0;
  std::optional<int> bigN;

  IndexRanges() = default;
  IndexRanges(int n_, int r_) : n(n_), r(r_), l(n_ - r_) { check(); }
  IndexRanges(int n_, int r_, int bigN_) : n(n_), r(r_), l(n_ - r_), bigN(bigN_) { check(); }

  void check() const {
    if (r < 1 || r >= n)
      fail(Errc::ShapeMismatch, "index ranges need 1 <= r < n, got r=" + std::to_string(r) +
                                    " n=" + std::to_string(n));
    if (l != n - r || l < 1)
      fail(Errc::ShapeMismatch, "index ranges need l = n - r >= 1");
    if (bigN && *bigN <= n)
      fail(Errc::ShapeMismatch, "embedding dimension must exceed n");
  }

  bool operator==(const IndexRanges& o) const {
    return n == o.n && r == o.r && l == o.l && bigN == o.bigN;
  }
};

} // namespace focalframes

#endif
