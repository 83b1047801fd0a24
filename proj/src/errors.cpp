#include "focalframes/errors.hpp"

namespace focalframes {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::AxisMismatch: return "AxisMismatch";
    case Errc::SingularMetric: return "SingularMetric";
    case Errc::NotValidated: return "NotValidated";
    case Errc::WrongAmbient: return "WrongAmbient";
    case Errc::ZeroPoint: return "ZeroPoint";
    case Errc::NotFactorable: return "NotFactorable";
    case Errc::EigenFailure: return "EigenFailure";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownIdentifier: return "UnknownIdentifier";
    case Errc::ArityError: return "ArityError";
    case Errc::DomainError: return "DomainError";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NotClosed: return "NotClosed";
    case Errc::StepTooCoarse: return "StepTooCoarse";
    case Errc::NotFlat: return "NotFlat";
    case Errc::PathDependence: return "PathDependence";
    case Errc::RankDeficientField: return "RankDeficientField";
    case Errc::UsageError: return "UsageError";
    case Errc::InputError: return "InputError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& msg)
    : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace focalframes
