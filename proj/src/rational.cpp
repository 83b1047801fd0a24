#include "focalframes/rational.hpp"

#include <cctype>
#include <ostream>
#include <sstream>

namespace focalframes {

Rat Rat::from_string(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
  if (t.empty()) fail(Errc::InputError, "empty rational literal");

  auto parse_decimal = [](const std::string& d) -> mpq_class {
    // Exact read of a decimal literal: shift the point into a power-of-ten
    // denominator. "1.25" -> 125/100.
    bool neg = false;
    std::size_t i = 0;
    if (d[i] == '+' || d[i] == '-') {
      neg = d[i] == '-';
      ++i;
    }
    std::string digits;
    long frac_len = -1;
    for (; i < d.size(); ++i) {
      char c = d[i];
      if (c == '.') {
        if (frac_len >= 0) fail(Errc::InputError, "malformed number '" + d + "'");
        frac_len = 0;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        digits.push_back(c);
        if (frac_len >= 0) ++frac_len;
      } else {
        fail(Errc::InputError, "malformed number '" + d + "'");
      }
    }
    if (digits.empty()) fail(Errc::InputError, "malformed number '" + d + "'");
    mpz_class num(digits, 10);
    mpz_class den = 1;
    for (long k = 0; k < (frac_len > 0 ? frac_len : 0); ++k) den *= 10;
    mpq_class q(num, den);
    q.canonicalize();
    if (neg) q = -q;
    return q;
  };

  std::size_t slash = t.find('/');
  if (slash != std::string::npos) {
    if (t.find('/', slash + 1) != std::string::npos)
      fail(Errc::InputError, "malformed rational '" + s + "'");
    mpq_class num = parse_decimal(t.substr(0, slash));
    mpq_class den = parse_decimal(t.substr(slash + 1));
    if (den == 0) fail(Errc::DomainError, "zero denominator in '" + s + "'");
    mpq_class q = num / den;
    q.canonicalize();
    return Rat(q);
  }
  return Rat(parse_decimal(t));
}

std::string Rat::str() const {
  std::ostringstream os;
  os << v_;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.v_; }

Rat abs(const Rat& r) { return r < Rat(0) ? -r : r; }

std::string ScalarTraits<double>::str(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

} // namespace focalframes
