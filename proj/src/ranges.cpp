#include "focalframes/ranges.hpp"

namespace focalframes {

const char* ambient_name(Ambient a) {
  switch (a) {
    case Ambient::Projective: return "projective";
    case Ambient::Affine: return "affine";
    case Ambient::Euclidean: return "euclidean";
  }
  return "unknown";
}

Ambient ambient_from_name(const std::string& s) {
  if (s == "projective") return Ambient::Projective;
  if (s == "affine") return Ambient::Affine;
  if (s == "euclidean") return Ambient::Euclidean;
  fail(Errc::InputError, "unknown ambient tag '" + s + "'");
}

} // namespace focalframes
