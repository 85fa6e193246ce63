#pragma once

#include <stdexcept>
#include <string>

namespace fluxbic {

enum class ErrorKind {
  InvalidArgument,
  NonHermitianResult,
  GridTooNarrow,
  ConvergenceNotCertified,
  NotConverged,
  AmbiguousParity,
  NoSideWells,
  NoMinimumInRange,
  WrongParityOrder,
  QutritLocalizationFailed,
  SingularTermSet,
  NotDownward,
  StateTrackingLost,
  ZeroFrequency,
  InvalidCutoffs,
  ModeGridTooCoarse,
  SchemaError,
  UnitError,
  IoError,
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonHermitianResult: return "NonHermitianResult";
    case ErrorKind::GridTooNarrow: return "GridTooNarrow";
    case ErrorKind::ConvergenceNotCertified: return "ConvergenceNotCertified";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::AmbiguousParity: return "AmbiguousParity";
    case ErrorKind::NoSideWells: return "NoSideWells";
    case ErrorKind::NoMinimumInRange: return "NoMinimumInRange";
    case ErrorKind::WrongParityOrder: return "WrongParityOrder";
    case ErrorKind::QutritLocalizationFailed: return "QutritLocalizationFailed";
    case ErrorKind::SingularTermSet: return "SingularTermSet";
    case ErrorKind::NotDownward: return "NotDownward";
    case ErrorKind::StateTrackingLost: return "StateTrackingLost";
    case ErrorKind::ZeroFrequency: return "ZeroFrequency";
    case ErrorKind::InvalidCutoffs: return "InvalidCutoffs";
    case ErrorKind::ModeGridTooCoarse: return "ModeGridTooCoarse";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::UnitError: return "UnitError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // Config problems are the caller's fault; everything else is numerical.
  bool is_config_error() const {
    return kind_ == ErrorKind::SchemaError || kind_ == ErrorKind::UnitError ||
           kind_ == ErrorKind::IoError || kind_ == ErrorKind::GridTooNarrow;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace fluxbic
