#ifndef FOCALFRAMES_RATIONAL_HPP
#define FOCALFRAMES_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>

#include "focalframes/errors.hpp"

namespace focalframes {

/// Exact rational scalar. Thin wrapper over GMP's mpq_class that keeps the
/// value canonical after every operation and adds the parsing/printing
/// conventions used throughout the library ("p/q", plain integers, and
/// decimal literals, which are read exactly).
class Rat {
public:
  Rat() : v_(0) {}
  Rat(int n) : v_(n) {}
  Rat(long n) : v_(static_cast<long int>(n)) {}
  Rat(long long n) { v_ = mpz_class(std::to_string(n)); }
  Rat(int num, int den) : v_(num, den) {
    if (den == 0) fail(Errc::DomainError, "rational with zero denominator");
    v_.canonicalize();
  }
  explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }

  static Rat from_string(const std::string& s);

  std::string str() const;
  double to_double() const { return v_.get_d(); }
  const mpq_class& raw() const { return v_; }

  Rat operator-() const { return Rat(mpq_class(-v_)); }
  Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
  Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
  Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
  Rat& operator/=(const Rat& o) {
    if (o.v_ == 0) fail(Errc::DomainError, "division by zero rational");
    v_ /= o.v_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { a += b; return a; }
  friend Rat operator-(Rat a, const Rat& b) { a -= b; return a; }
  friend Rat operator*(Rat a, const Rat& b) { a *= b; return a; }
  friend Rat operator/(Rat a, const Rat& b) { a /= b; return a; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

  friend std::ostream& operator<<(std::ostream& os, const Rat& r);

private:
  mpq_class v_;
};

Rat abs(const Rat& r);

/// Scalar traits used by the templated tensor/linear-algebra layers.
/// K is either Rat (exact) or double (floating, compared with tolerance).
template <class K>
struct ScalarTraits;

template <>
struct ScalarTraits<Rat> {
  static constexpr bool exact = true;
  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }
  static bool is_zero(const Rat& x, double /*tol*/ = 0.0) { return x == Rat(0); }
  static double to_double(const Rat& x) { return x.to_double(); }
  static std::string str(const Rat& x) { return x.str(); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static bool is_zero(double x, double tol) { return x <= tol && x >= -tol; }
  static double to_double(double x) { return x; }
  static std::string str(double x);
};

} // namespace focalframes

#endif
