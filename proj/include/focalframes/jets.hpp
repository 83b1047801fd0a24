#ifndef FOCALFRAMES_JETS_HPP
#define FOCALFRAMES_JETS_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "focalframes/errors.hpp"

namespace focalframes {

/// Value plus gradient in m parameters; forward-mode, fixed order 1.
struct Taylor1 {
  double v = 0.0;
  std::vector<double> g;

  Taylor1() = default;
  explicit Taylor1(int m) : g(static_cast<std::size_t>(m), 0.0) {}

  static Taylor1 constant(int m, double c) {
    Taylor1 t(m);
    t.v = c;
    return t;
  }

  static Taylor1 var(int m, int i, double x) {
    Taylor1 t(m);
    t.v = x;
    t.g[static_cast<std::size_t>(i)] = 1.0;
    return t;
  }

  int dims() const { return static_cast<int>(g.size()); }
};

/// Value, gradient, and symmetric Hessian in m parameters.
struct Taylor2 {
  double v = 0.0;
  std::vector<double> g;
  std::vector<double> h; // row-major m x m

  Taylor2() = default;
  explicit Taylor2(int m)
      : g(static_cast<std::size_t>(m), 0.0),
        h(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0) {}

  static Taylor2 constant(int m, double c) {
    Taylor2 t(m);
    t.v = c;
    return t;
  }

  static Taylor2 var(int m, int i, double x) {
    Taylor2 t(m);
    t.v = x;
    t.g[static_cast<std::size_t>(i)] = 1.0;
    return t;
  }

  int dims() const { return static_cast<int>(g.size()); }
  double& hess(int i, int j) { return h[static_cast<std::size_t>(i) * g.size() + static_cast<std::size_t>(j)]; }
  double hess(int i, int j) const { return h[static_cast<std::size_t>(i) * g.size() + static_cast<std::size_t>(j)]; }
};

namespace detail {
inline void same_dims(const Taylor1& a, const Taylor1& b) {
  if (a.g.size() != b.g.size()) fail(Errc::ShapeMismatch, "jet parameter counts differ");
}
inline void same_dims(const Taylor2& a, const Taylor2& b) {
  if (a.g.size() != b.g.size()) fail(Errc::ShapeMismatch, "jet parameter counts differ");
}
} // namespace detail

inline Taylor1 operator-(const Taylor1& a) {
  Taylor1 out(a.dims());
  out.v = -a.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = -a.g[i];
  return out;
}

inline Taylor1 operator+(const Taylor1& a, const Taylor1& b) {
  detail::same_dims(a, b);
  Taylor1 out(a.dims());
  out.v = a.v + b.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] + b.g[i];
  return out;
}

inline Taylor1 operator-(const Taylor1& a, const Taylor1& b) {
  detail::same_dims(a, b);
  Taylor1 out(a.dims());
  out.v = a.v - b.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] - b.g[i];
  return out;
}

inline Taylor1 operator*(const Taylor1& a, const Taylor1& b) {
  detail::same_dims(a, b);
  Taylor1 out(a.dims());
  out.v = a.v * b.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] * b.v + a.v * b.g[i];
  return out;
}

inline Taylor1 operator*(const Taylor1& a, double s) {
  Taylor1 out(a.dims());
  out.v = a.v * s;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] * s;
  return out;
}

inline Taylor1 operator*(double s, const Taylor1& a) { return a * s; }
inline Taylor1 operator+(const Taylor1& a, double s) {
  Taylor1 out = a;
  out.v += s;
  return out;
}
inline Taylor1 operator-(const Taylor1& a, double s) { return a + (-s); }

inline Taylor1 operator/(const Taylor1& a, const Taylor1& b) {
  detail::same_dims(a, b);
  if (b.v == 0.0) fail(Errc::DomainError, "division by zero");
  Taylor1 out(a.dims());
  out.v = a.v / b.v;
  double inv2 = 1.0 / (b.v * b.v);
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = (a.g[i] * b.v - a.v * b.g[i]) * inv2;
  return out;
}

inline Taylor1 operator/(const Taylor1& a, double s) {
  if (s == 0.0) fail(Errc::DomainError, "division by zero");
  return a * (1.0 / s);
}

inline Taylor1 sin(const Taylor1& a) {
  Taylor1 out(a.dims());
  out.v = std::sin(a.v);
  double d = std::cos(a.v);
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = d * a.g[i];
  return out;
}

inline Taylor1 cos(const Taylor1& a) {
  Taylor1 out(a.dims());
  out.v = std::cos(a.v);
  double d = -std::sin(a.v);
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = d * a.g[i];
  return out;
}

inline Taylor1 exp(const Taylor1& a) {
  Taylor1 out(a.dims());
  out.v = std::exp(a.v);
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = out.v * a.g[i];
  return out;
}

inline Taylor1 log(const Taylor1& a) {
  if (a.v <= 0.0) fail(Errc::DomainError, "log of a non-positive value");
  Taylor1 out(a.dims());
  out.v = std::log(a.v);
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] / a.v;
  return out;
}

inline Taylor1 sqrt(const Taylor1& a) {
  if (a.v <= 0.0) fail(Errc::DomainError, "sqrt of a non-positive value");
  Taylor1 out(a.dims());
  out.v = std::sqrt(a.v);
  double d = 0.5 / out.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = d * a.g[i];
  return out;
}

inline Taylor2 operator-(const Taylor2& a) {
  Taylor2 out(a.dims());
  out.v = -a.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = -a.g[i];
  for (std::size_t i = 0; i < a.h.size(); ++i) out.h[i] = -a.h[i];
  return out;
}

inline Taylor2 operator+(const Taylor2& a, const Taylor2& b) {
  detail::same_dims(a, b);
  Taylor2 out(a.dims());
  out.v = a.v + b.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] + b.g[i];
  for (std::size_t i = 0; i < a.h.size(); ++i) out.h[i] = a.h[i] + b.h[i];
  return out;
}

inline Taylor2 operator-(const Taylor2& a, const Taylor2& b) {
  detail::same_dims(a, b);
  Taylor2 out(a.dims());
  out.v = a.v - b.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] - b.g[i];
  for (std::size_t i = 0; i < a.h.size(); ++i) out.h[i] = a.h[i] - b.h[i];
  return out;
}

inline Taylor2 operator*(const Taylor2& a, const Taylor2& b) {
  detail::same_dims(a, b);
  const std::size_t m = a.g.size();
  Taylor2 out(a.dims());
  out.v = a.v * b.v;
  for (std::size_t i = 0; i < m; ++i) out.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out.h[i * m + j] =
          a.h[i * m + j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i * m + j];
  return out;
}

inline Taylor2 operator*(const Taylor2& a, double s) {
  Taylor2 out(a.dims());
  out.v = a.v * s;
  for (std::size_t i = 0; i < a.g.size(); ++i) out.g[i] = a.g[i] * s;
  for (std::size_t i = 0; i < a.h.size(); ++i) out.h[i] = a.h[i] * s;
  return out;
}

inline Taylor2 operator*(double s, const Taylor2& a) { return a * s; }

namespace detail {

/// Reciprocal jet; the building block for division.
inline Taylor2 jet_inv(const Taylor2& b) {
  if (b.v == 0.0) fail(Errc::DomainError, "division by zero");
  const std::size_t m = b.g.size();
  Taylor2 out(b.dims());
  double iv = 1.0 / b.v, iv2 = iv * iv, iv3 = iv2 * iv;
  out.v = iv;
  for (std::size_t i = 0; i < m; ++i) out.g[i] = -b.g[i] * iv2;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out.h[i * m + j] = 2.0 * b.g[i] * b.g[j] * iv3 - b.h[i * m + j] * iv2;
  return out;
}

/// Scalar chain rule f(a) given f(v), f'(v), f''(v).
inline Taylor2 jet_chain(const Taylor2& a, double f, double df, double ddf) {
  const std::size_t m = a.g.size();
  Taylor2 out(a.dims());
  out.v = f;
  for (std::size_t i = 0; i < m; ++i) out.g[i] = df * a.g[i];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out.h[i * m + j] = ddf * a.g[i] * a.g[j] + df * a.h[i * m + j];
  return out;
}

} // namespace detail

inline Taylor2 operator/(const Taylor2& a, const Taylor2& b) {
  detail::same_dims(a, b);
  return a * detail::jet_inv(b);
}

inline Taylor2 sin(const Taylor2& a) {
  return detail::jet_chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}
inline Taylor2 cos(const Taylor2& a) {
  return detail::jet_chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}
inline Taylor2 exp(const Taylor2& a) {
  double e = std::exp(a.v);
  return detail::jet_chain(a, e, e, e);
}
inline Taylor2 log(const Taylor2& a) {
  if (a.v <= 0.0) fail(Errc::DomainError, "log of a non-positive value");
  return detail::jet_chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
inline Taylor2 sqrt(const Taylor2& a) {
  if (a.v <= 0.0) fail(Errc::DomainError, "sqrt of a non-positive value");
  double s = std::sqrt(a.v);
  return detail::jet_chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

/// Integer powers for every evaluation scalar, including negatives.
template <class S>
S jet_ipow(const S& a, int n, const S& one) {
  if (n == 0) return one;
  bool neg = n < 0;
  long long e = neg ? -static_cast<long long>(n) : n;
  S acc = one;
  S base = a;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  if (!neg) return acc;
  return one / acc;
}

} // namespace focalframes

#endif
