#ifndef FOCALFRAMES_ERRORS_HPP
#define FOCALFRAMES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace focalframes {

/// Failure categories surfaced by the library. Every thrown focalframes::Error
/// carries exactly one of these so callers can branch without string matching.
enum class Errc {
  ShapeMismatch,
  AxisMismatch,
  SingularMetric,
  NotValidated,
  WrongAmbient,
  ZeroPoint,
  NotFactorable,
  EigenFailure,
  SyntaxError,
  UnknownIdentifier,
  ArityError,
  DomainError,
  RankDeficient,
  NotClosed,
  StepTooCoarse,
  NotFlat,
  PathDependence,
  RankDeficientField,
  UsageError,
  InputError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg);
  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& msg);

} // namespace focalframes

#endif
