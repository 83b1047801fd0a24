#ifndef FOCALFRAMES_MULTIPOLY_HPP
#define FOCALFRAMES_MULTIPOLY_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "focalframes/linalg.hpp"
#include "focalframes/rational.hpp"

namespace focalframes {

/// Sparse multivariate polynomial over K in a fixed number of variables.
/// Terms are keyed by exponent vectors; std::map's vector ordering gives
/// lexicographic term order for free. Zero coefficients are never stored.
template <class K>
class MultiPoly {
public:
  using Exps = std::vector<unsigned>;
  using Terms = std::map<Exps, K>;

  explicit MultiPoly(int nvars = 0) : nvars_(nvars) {}

  static MultiPoly constant(int nvars, K c) {
    MultiPoly p(nvars);
    p.add_term(Exps(static_cast<std::size_t>(nvars), 0u), std::move(c));
    return p;
  }

  static MultiPoly variable(int nvars, int i) {
    MultiPoly p(nvars);
    Exps e(static_cast<std::size_t>(nvars), 0u);
    e[static_cast<std::size_t>(i)] = 1u;
    p.add_term(std::move(e), ScalarTraits<K>::one());
    return p;
  }

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  bool is_zero_within(double tol) const {
    for (const auto& [e, c] : terms_)
      if (!ScalarTraits<K>::is_zero(c, tol)) return false;
    return true;
  }

  void add_term(Exps e, K c) {
    if (static_cast<int>(e.size()) != nvars_)
      fail(Errc::ShapeMismatch, "exponent vector length does not match variable count");
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      if (!(c == ScalarTraits<K>::zero())) terms_.emplace(std::move(e), std::move(c));
    } else {
      it->second += c;
      if (it->second == ScalarTraits<K>::zero()) terms_.erase(it);
    }
  }

  K coeff(const Exps& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? ScalarTraits<K>::zero() : it->second;
  }

  int total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      unsigned s = 0;
      for (unsigned x : e) s += x;
      d = std::max(d, static_cast<int>(s));
    }
    return d;
  }

  MultiPoly operator-() const {
    MultiPoly out(nvars_);
    for (const auto& [e, c] : terms_) out.terms_.emplace(e, -c);
    return out;
  }

  MultiPoly& operator+=(const MultiPoly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }

  MultiPoly& operator-=(const MultiPoly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }

  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { a += b; return a; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { a -= b; return a; }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    a.check_same(b);
    MultiPoly out(a.nvars_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exps e = ea;
        for (std::size_t k = 0; k < e.size(); ++k) e[k] += eb[k];
        out.add_term(std::move(e), ca * cb);
      }
    return out;
  }

  MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }

  MultiPoly scaled(const K& s) const {
    MultiPoly out(nvars_);
    if (s == ScalarTraits<K>::zero()) return out;
    for (const auto& [e, c] : terms_) out.terms_.emplace(e, c * s);
    return out;
  }

  bool operator==(const MultiPoly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

  K eval(const std::vector<K>& x) const {
    if (static_cast<int>(x.size()) != nvars_)
      fail(Errc::ShapeMismatch, "evaluation point length does not match variable count");
    K total = ScalarTraits<K>::zero();
    for (const auto& [e, c] : terms_) {
      K term = c;
      for (std::size_t k = 0; k < e.size(); ++k)
        for (unsigned j = 0; j < e[k]; ++j) term *= x[k];
      total += term;
    }
    return total;
  }

  /// Lexicographically largest term; polynomial must be nonzero.
  std::pair<Exps, K> leading_term() const {
    if (terms_.empty()) fail(Errc::DomainError, "leading term of zero polynomial");
    auto it = std::prev(terms_.end());
    return {it->first, it->second};
  }

  /// Substitute x_i = sum_j M[i][j] y_j. The result lives in new_nvars
  /// variables (the column count of M).
  MultiPoly compose_linear(const Mat<K>& M, int new_nvars) const {
    if (static_cast<int>(M.size()) != nvars_)
      fail(Errc::ShapeMismatch, "substitution matrix row count does not match variable count");
    std::vector<MultiPoly> images;
    images.reserve(static_cast<std::size_t>(nvars_));
    for (int i = 0; i < nvars_; ++i) {
      MultiPoly img(new_nvars);
      for (int j = 0; j < new_nvars; ++j) {
        if (M[i][j] == ScalarTraits<K>::zero()) continue;
        Exps e(static_cast<std::size_t>(new_nvars), 0u);
        e[static_cast<std::size_t>(j)] = 1u;
        img.add_term(std::move(e), M[i][j]);
      }
      images.push_back(std::move(img));
    }
    MultiPoly out(new_nvars);
    for (const auto& [e, c] : terms_) {
      MultiPoly term = MultiPoly::constant(new_nvars, c);
      for (std::size_t k = 0; k < e.size(); ++k)
        for (unsigned j = 0; j < e[k]; ++j) term *= images[k];
      out += term;
    }
    return out;
  }

  /// Set variable i to zero and delete its slot.
  MultiPoly without_var(int i) const {
    MultiPoly out(nvars_ - 1);
    for (const auto& [e, c] : terms_) {
      if (e[static_cast<std::size_t>(i)] != 0) continue;
      Exps ne;
      ne.reserve(e.size() - 1);
      for (std::size_t k = 0; k < e.size(); ++k)
        if (static_cast<int>(k) != i) ne.push_back(e[k]);
      out.add_term(std::move(ne), c);
    }
    return out;
  }

  /// Drop coefficients below tol in magnitude (float cleanup only).
  MultiPoly pruned(double tol) const {
    MultiPoly out(nvars_);
    for (const auto& [e, c] : terms_)
      if (!ScalarTraits<K>::is_zero(c, tol)) out.terms_.emplace(e, c);
    return out;
  }

private:
  void check_same(const MultiPoly& o) const {
    if (nvars_ != o.nvars_) fail(Errc::ShapeMismatch, "variable counts differ");
  }

  int nvars_ = 0;
  Terms terms_;
};

/// Exact single-divisor division for the fraction-free elimination: requires
/// that den divides num in the polynomial ring. Exact scalars only.
inline MultiPoly<Rat> divide_exact(MultiPoly<Rat> num, const MultiPoly<Rat>& den) {
  if (den.is_zero()) fail(Errc::DomainError, "polynomial division by zero");
  MultiPoly<Rat> q(num.nvars());
  auto [de, dc] = den.leading_term();
  while (!num.is_zero()) {
    auto [ne, nc] = num.leading_term();
    MultiPoly<Rat>::Exps qe(ne.size());
    for (std::size_t k = 0; k < ne.size(); ++k) {
      if (ne[k] < de[k])
        fail(Errc::DomainError, "non-exact polynomial division");
      qe[k] = ne[k] - de[k];
    }
    MultiPoly<Rat> mono(num.nvars());
    mono.add_term(qe, nc / dc);
    q += mono;
    num -= mono * den;
  }
  return q;
}

/// Fraction-free Bareiss determinant over the polynomial ring. Every division
/// is exact by construction. Intended for exact scalars and modest sizes.
inline MultiPoly<Rat> det_bareiss(std::vector<std::vector<MultiPoly<Rat>>> m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) fail(Errc::ShapeMismatch, "determinant of empty matrix");
  const int nv = m[0][0].nvars();
  if (n == 1) return m[0][0];
  MultiPoly<Rat> prev = MultiPoly<Rat>::constant(nv, Rat(1));
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k].is_zero()) {
      int swap_row = -1;
      for (int i = k + 1; i < n; ++i)
        if (!m[i][k].is_zero()) {
          swap_row = i;
          break;
        }
      if (swap_row < 0) return MultiPoly<Rat>(nv); // a zero column: det vanishes
      std::swap(m[k], m[swap_row]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = divide_exact(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev);
    prev = m[k][k];
  }
  MultiPoly<Rat> det = m[n - 1][n - 1];
  return sign < 0 ? -det : det;
}

/// Cofactor (first-row expansion) determinant; works for any scalar kind.
template <class K>
MultiPoly<K> det_cofactor(const std::vector<std::vector<MultiPoly<K>>>& m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) fail(Errc::ShapeMismatch, "determinant of empty matrix");
  const int nv = m[0][0].nvars();
  if (n == 1) return m[0][0];
  MultiPoly<K> det(nv);
  for (int j = 0; j < n; ++j) {
    if (m[0][j].is_zero()) continue;
    std::vector<std::vector<MultiPoly<K>>> minor;
    minor.reserve(static_cast<std::size_t>(n - 1));
    for (int i = 1; i < n; ++i) {
      std::vector<MultiPoly<K>> row;
      row.reserve(static_cast<std::size_t>(n - 1));
      for (int jj = 0; jj < n; ++jj)
        if (jj != j) row.push_back(m[i][jj]);
      minor.push_back(std::move(row));
    }
    MultiPoly<K> contrib = m[0][j] * det_cofactor(minor);
    if (j % 2 == 1) contrib = -contrib;
    det += contrib;
  }
  return det;
}

/// Full permutation expansion. Exponential; test oracle for small sizes only.
template <class K>
MultiPoly<K> det_permutation(const std::vector<std::vector<MultiPoly<K>>>& m) {
  const int n = static_cast<int>(m.size());
  const int nv = m[0][0].nvars();
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  MultiPoly<K> det(nv);
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) ++inversions;
    MultiPoly<K> prod = MultiPoly<K>::constant(nv, ScalarTraits<K>::one());
    for (int i = 0; i < n; ++i) prod *= m[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    if (inversions % 2 == 1) prod = -prod;
    det += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

// ---------------------------------------------------------------------------
// Exact univariate helpers backing the factorization routines.
// Coefficient vectors are little-endian: u[i] multiplies x^i.
// ---------------------------------------------------------------------------

using UniPoly = std::vector<Rat>;

inline void uni_trim(UniPoly& p) {
  while (!p.empty() && p.back() == Rat(0)) p.pop_back();
}

inline int uni_deg(const UniPoly& p) { return static_cast<int>(p.size()) - 1; }

inline UniPoly uni_mul(const UniPoly& a, const UniPoly& b) {
  if (a.empty() || b.empty()) return {};
  UniPoly out(a.size() + b.size() - 1, Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  uni_trim(out);
  return out;
}

inline UniPoly uni_sub(UniPoly a, const UniPoly& b) {
  if (a.size() < b.size()) a.resize(b.size(), Rat(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  uni_trim(a);
  return a;
}

/// Quotient and remainder of a by b (b nonzero).
inline std::pair<UniPoly, UniPoly> uni_divmod(UniPoly a, const UniPoly& b) {
  if (b.empty()) fail(Errc::DomainError, "univariate division by zero");
  UniPoly q;
  while (uni_deg(a) >= uni_deg(b)) {
    int shift = uni_deg(a) - uni_deg(b);
    Rat f = a.back() / b.back();
    if (static_cast<int>(q.size()) < shift + 1) q.resize(static_cast<std::size_t>(shift) + 1, Rat(0));
    q[static_cast<std::size_t>(shift)] += f;
    UniPoly sub(static_cast<std::size_t>(shift) + b.size(), Rat(0));
    for (std::size_t i = 0; i < b.size(); ++i) sub[static_cast<std::size_t>(shift) + i] = b[i] * f;
    a = uni_sub(std::move(a), sub);
  }
  uni_trim(q);
  return {q, a};
}

inline UniPoly uni_derivative(const UniPoly& p) {
  if (p.size() <= 1) return {};
  UniPoly out(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) out[i - 1] = p[i] * Rat(static_cast<int>(i));
  uni_trim(out);
  return out;
}

inline UniPoly uni_monic(UniPoly p) {
  uni_trim(p);
  if (p.empty()) return p;
  Rat lead = p.back();
  for (Rat& c : p) c /= lead;
  return p;
}

inline UniPoly uni_gcd(UniPoly a, UniPoly b) {
  uni_trim(a);
  uni_trim(b);
  while (!b.empty()) {
    UniPoly r = uni_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return uni_monic(std::move(a));
}

/// Yun's square-free decomposition of a monic polynomial:
/// returns s with p = prod s[i]^(i+1), each s[i] square-free.
inline std::vector<UniPoly> uni_squarefree(UniPoly p) {
  p = uni_monic(std::move(p));
  std::vector<UniPoly> out;
  if (uni_deg(p) < 1) return out;
  UniPoly dp = uni_derivative(p);
  UniPoly a = uni_gcd(p, dp);
  UniPoly b = uni_divmod(p, a).first;
  UniPoly c = uni_divmod(dp, a).first;
  UniPoly d = uni_sub(c, uni_derivative(b));
  while (uni_deg(b) > 0) {
    UniPoly s = uni_gcd(b, d);
    out.push_back(uni_monic(s));
    b = uni_divmod(b, s).first;
    c = uni_divmod(d, s).first;
    d = uni_sub(c, uni_derivative(b));
  }
  return out;
}

namespace detail {

/// Divisors of |z| by trial division; gives up past the cap so callers can
/// report an honest factorization boundary instead of stalling.
inline bool small_divisors(mpz_class z, std::vector<mpz_class>& out) {
  constexpr unsigned long kPrimeCap = 1000000UL;
  z = abs(z);
  if (z == 0) return false;
  std::vector<std::pair<mpz_class, unsigned>> fac;
  for (unsigned long p = 2; p <= kPrimeCap && mpz_class(p) * p <= z; p += (p == 2 ? 1 : 2)) {
    if (z % p == 0) {
      unsigned e = 0;
      while (z % p == 0) {
        z /= p;
        ++e;
      }
      fac.emplace_back(p, e);
    }
  }
  if (z > 1) {
    if (z > kPrimeCap && !(mpz_probab_prime_p(z.get_mpz_t(), 25) > 0)) return false;
    fac.emplace_back(z, 1);
  }
  out = {mpz_class(1)};
  for (const auto& [p, e] : fac) {
    std::vector<mpz_class> next;
    mpz_class pk = 1;
    for (unsigned k = 0; k <= e; ++k) {
      for (const mpz_class& d : out) next.push_back(d * pk);
      pk *= p;
    }
    out = std::move(next);
  }
  return true;
}

} // namespace detail

/// Flat serialization of a rational polynomial: one record per term in
/// lexicographic exponent order, coefficient split into integer numerator and
/// denominator strings so the round trip is bit-exact.
struct PolyRecord {
  std::vector<unsigned> exps;
  std::string num;
  std::string den;
};

inline std::vector<PolyRecord> poly_records(const MultiPoly<Rat>& p) {
  std::vector<PolyRecord> out;
  out.reserve(p.terms().size());
  for (const auto& [e, c] : p.terms()) {
    PolyRecord rec;
    rec.exps = e;
    rec.num = c.raw().get_num().get_str();
    rec.den = c.raw().get_den().get_str();
    out.push_back(std::move(rec));
  }
  return out;
}

inline MultiPoly<Rat> poly_from_records(int nvars, const std::vector<PolyRecord>& recs) {
  MultiPoly<Rat> p(nvars);
  for (const PolyRecord& rec : recs) {
    try {
      mpz_class num(rec.num), den(rec.den);
      if (den == 0) fail(Errc::DomainError, "zero denominator in polynomial record");
      p.add_term(rec.exps, Rat(mpq_class(num, den)));
    } catch (const std::invalid_argument&) {
      fail(Errc::InputError, "malformed integer in polynomial record");
    }
  }
  return p;
}

/// All rational roots with multiplicity; the residual factor (root-free,
/// monic) is returned in residual. Returns false when the divisor search hit
/// its factorization cap and completeness can no longer be promised.
inline bool uni_rational_roots(const UniPoly& p, std::vector<std::pair<Rat, int>>& roots,
                               UniPoly& residual) {
  roots.clear();
  UniPoly work = uni_monic(p);
  if (uni_deg(work) < 1) {
    residual = work;
    return true;
  }

  int zero_mult = 0;
  while (uni_deg(work) >= 1 && work.front() == Rat(0)) {
    work.erase(work.begin());
    ++zero_mult;
  }
  if (zero_mult > 0) roots.emplace_back(Rat(0), zero_mult);

  if (uni_deg(work) >= 1) {
    // Candidates nu/de with nu dividing the constant and de the leading
    // coefficient of the integer-scaled polynomial. Roots of any deflation
    // are roots of the original, so one candidate set serves throughout.
    mpz_class lc = 1;
    for (const Rat& c : work) {
      mpz_class d = c.raw().get_den();
      lc = lc / gcd(lc, d) * d;
    }
    std::vector<mpz_class> wz;
    wz.reserve(work.size());
    for (const Rat& c : work) wz.push_back(mpq_class(c.raw() * lc).get_num());
    std::vector<mpz_class> num_divs, den_divs;
    if (!detail::small_divisors(wz.front(), num_divs) ||
        !detail::small_divisors(wz.back(), den_divs)) {
      residual = uni_monic(work);
      return false;
    }

    bool exhausted = false;
    for (std::size_t ni = 0; ni < num_divs.size() && !exhausted; ++ni)
      for (std::size_t di = 0; di < den_divs.size() && !exhausted; ++di)
        for (int sgn = 0; sgn < 2 && !exhausted; ++sgn) {
          Rat cand{mpq_class(sgn == 0 ? num_divs[ni] : -num_divs[ni], den_divs[di])};
          int mult = 0;
          while (uni_deg(work) >= 1) {
            Rat v(0);
            for (auto it = work.rbegin(); it != work.rend(); ++it) v = v * cand + *it;
            if (!(v == Rat(0))) break;
            work = uni_divmod(work, UniPoly{-cand, Rat(1)}).first;
            ++mult;
          }
          if (mult > 0) roots.emplace_back(cand, mult);
          if (uni_deg(work) < 1) exhausted = true;
        }
  }
  residual = uni_monic(work);
  return true;
}

} // namespace focalframes

#endif
