#pragma once

#include <stdexcept>
#include <string>

namespace kmesh {

enum class Errc {
  CurvatureMismatch,
  AntipodalPoints,
  NonUniqueGeodesic,
  OutOfRange,
  DegeneratePoints,
  InvalidSides,
  DegenerateTriangle,
  CircumcenterUndefined,
  OutsideHemisphere,
  InvalidEps,
  NotHemispheric,
  SelfIntersectingBoundary,
  InvalidComplex,
  LevelCapExceeded,
  BudgetExhausted,
  ParameterMismatch,
  ParseError,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::CurvatureMismatch: return "CurvatureMismatch";
    case Errc::AntipodalPoints: return "AntipodalPoints";
    case Errc::NonUniqueGeodesic: return "NonUniqueGeodesic";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::DegeneratePoints: return "DegeneratePoints";
    case Errc::InvalidSides: return "InvalidSides";
    case Errc::DegenerateTriangle: return "DegenerateTriangle";
    case Errc::CircumcenterUndefined: return "CircumcenterUndefined";
    case Errc::OutsideHemisphere: return "OutsideHemisphere";
    case Errc::InvalidEps: return "InvalidEps";
    case Errc::NotHemispheric: return "NotHemispheric";
    case Errc::SelfIntersectingBoundary: return "SelfIntersectingBoundary";
    case Errc::InvalidComplex: return "InvalidComplex";
    case Errc::LevelCapExceeded: return "LevelCapExceeded";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::ParameterMismatch: return "ParameterMismatch";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace kmesh
