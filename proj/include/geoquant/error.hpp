#pragma once

#include <stdexcept>
#include <string>

namespace geoquant {

enum class ErrorKind {
  DegenerateSupport,
  NonFinite,
  TooFewPoints,
  DimensionMismatch,
  BadParams,
  AtomHit,
  InvalidThreshold,
  Infeasible,
  ZeroMass,
  NotAdmissible,
  EmptyRegion,
  FileNotFound,
  ParseError,
  IoError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DegenerateSupport: return "DegenerateSupport";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::AtomHit: return "AtomHit";
    case ErrorKind::InvalidThreshold: return "InvalidThreshold";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  const char* kind_name() const { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

/// Thrown when an evaluation point coincides with a sample point.
class AtomHitError : public Error {
 public:
  AtomHitError(long atom_index, const std::string& message)
      : Error(ErrorKind::AtomHit, message), atom_index_(atom_index) {}

  long atom_index() const { return atom_index_; }

 private:
  long atom_index_;
};

}  // namespace geoquant
