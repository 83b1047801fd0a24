#ifndef FOCALFRAMES_LINALG_HPP
#define FOCALFRAMES_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "focalframes/ranges.hpp"
#include "focalframes/rational.hpp"

namespace focalframes {

/// Row-major dense matrix over K (Rat or double). Small sizes only; these
/// helpers favor exactness and clarity over asymptotics.
template <class K>
using Mat = std::vector<std::vector<K>>;

template <class K>
Mat<K> mat_zero(int rows, int cols) {
  return Mat<K>(static_cast<std::size_t>(rows),
                std::vector<K>(static_cast<std::size_t>(cols), ScalarTraits<K>::zero()));
}

template <class K>
Mat<K> mat_identity(int n) {
  Mat<K> m = mat_zero<K>(n, n);
  for (int i = 0; i < n; ++i) m[i][i] = ScalarTraits<K>::one();
  return m;
}

template <class K>
Mat<K> mat_mul(const Mat<K>& a, const Mat<K>& b) {
  if (a.empty() || b.empty() || a[0].size() != b.size())
    fail(Errc::ShapeMismatch, "matrix product shape mismatch");
  Mat<K> out = mat_zero<K>(static_cast<int>(a.size()), static_cast<int>(b[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) {
      const K& aik = a[i][k];
      if (ScalarTraits<K>::is_zero(aik, 0.0)) continue;
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += aik * b[k][j];
    }
  return out;
}

template <class K>
std::vector<K> mat_vec(const Mat<K>& a, const std::vector<K>& x) {
  if (a.empty() || a[0].size() != x.size())
    fail(Errc::ShapeMismatch, "matrix-vector shape mismatch");
  std::vector<K> out(a.size(), ScalarTraits<K>::zero());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) out[i] += a[i][j] * x[j];
  return out;
}

template <class K>
Mat<K> mat_transpose(const Mat<K>& a) {
  if (a.empty()) return a;
  Mat<K> out = mat_zero<K>(static_cast<int>(a[0].size()), static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) out[j][i] = a[i][j];
  return out;
}

template <class K>
Mat<K> mat_sub(const Mat<K>& a, const Mat<K>& b) {
  Mat<K> out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) out[i][j] -= b[i][j];
  return out;
}

template <class K>
double mat_max_abs(const Mat<K>& a) {
  double m = 0.0;
  for (const auto& row : a)
    for (const K& v : row) m = std::max(m, std::abs(ScalarTraits<K>::to_double(v)));
  return m;
}

template <class K>
bool mat_is_symmetric(const Mat<K>& a, double tol = kDefaultTol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if constexpr (ScalarTraits<K>::exact) {
        if (!(a[i][j] == a[j][i])) return false;
      } else {
        if (std::abs(a[i][j] - a[j][i]) > tol) return false;
      }
    }
  return true;
}

namespace detail {
template <class K>
int pick_pivot(const Mat<K>& m, int col, int from, double tol) {
  if constexpr (ScalarTraits<K>::exact) {
    for (int i = from; i < static_cast<int>(m.size()); ++i)
      if (!(m[i][col] == ScalarTraits<K>::zero())) return i;
    return -1;
  } else {
    int best = -1;
    double best_abs = tol;
    for (int i = from; i < static_cast<int>(m.size()); ++i) {
      double v = std::abs(ScalarTraits<K>::to_double(m[i][col]));
      if (v > best_abs) {
        best_abs = v;
        best = i;
      }
    }
    return best;
  }
}
} // namespace detail

/// Gauss-Jordan inverse. Singular input raises `on_singular` so callers can
/// surface the context-appropriate failure (metric vs generic).
template <class K>
Mat<K> mat_inverse(const Mat<K>& a, double tol = kDefaultTol,
                   Errc on_singular = Errc::SingularMetric) {
  const int n = static_cast<int>(a.size());
  Mat<K> m = a;
  Mat<K> inv = mat_identity<K>(n);
  for (int col = 0; col < n; ++col) {
    int piv = detail::pick_pivot(m, col, col, tol);
    if (piv < 0) fail(on_singular, "matrix is singular");
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    K d = m[col][col];
    for (int j = 0; j < n; ++j) {
      m[col][j] /= d;
      inv[col][j] /= d;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      K f = m[i][col];
      if (ScalarTraits<K>::is_zero(f, 0.0)) continue;
      for (int j = 0; j < n; ++j) {
        m[i][j] -= f * m[col][j];
        inv[i][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

/// Reduced row echelon form in place; returns the pivot column list.
template <class K>
std::vector<int> rref(Mat<K>& m, double tol = kDefaultTol) {
  std::vector<int> pivots;
  if (m.empty()) return pivots;
  const int rows = static_cast<int>(m.size());
  const int cols = static_cast<int>(m[0].size());
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int piv = detail::pick_pivot(m, col, row, tol);
    if (piv < 0) continue;
    std::swap(m[piv], m[row]);
    K d = m[row][col];
    for (int j = 0; j < cols; ++j) m[row][j] /= d;
    for (int i = 0; i < rows; ++i) {
      if (i == row) continue;
      K f = m[i][col];
      if (ScalarTraits<K>::is_zero(f, 0.0)) continue;
      for (int j = 0; j < cols; ++j) m[i][j] -= f * m[row][j];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

/// Basis of the right kernel of a (not necessarily square) matrix.
template <class K>
std::vector<std::vector<K>> kernel_basis(const Mat<K>& a, double tol = kDefaultTol) {
  Mat<K> m = a;
  std::vector<int> pivots = rref(m, tol);
  const int cols = a.empty() ? 0 : static_cast<int>(a[0].size());
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<std::vector<K>> basis;
  for (int free_col = 0; free_col < cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    std::vector<K> v(cols, ScalarTraits<K>::zero());
    v[free_col] = ScalarTraits<K>::one();
    for (std::size_t prow = 0; prow < pivots.size(); ++prow)
      v[pivots[prow]] = -m[prow][free_col];
    basis.push_back(std::move(v));
  }
  return basis;
}

template <class K>
int mat_rank(const Mat<K>& a, double tol = kDefaultTol) {
  Mat<K> m = a;
  return static_cast<int>(rref(m, tol).size());
}

template <class K>
std::vector<K> solve(const Mat<K>& a, const std::vector<K>& b, double tol = kDefaultTol,
                     Errc on_singular = Errc::SingularMetric) {
  return mat_vec(mat_inverse(a, tol, on_singular), b);
}

} // namespace focalframes

#endif
