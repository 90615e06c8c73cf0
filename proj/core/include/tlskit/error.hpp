#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tlskit {

// Contract-violation categories. The names are part of the CLI surface:
// they are printed verbatim on stderr and map to exit code 2.
enum class Errc {
  InvalidSpec,
  InvalidValue,
  OutOfBounds,
  DimMismatch,
  EmptySites,
  NoLabeledSamples,
  UndefinedMetric,
  ZeroArea,
  TooFewSamples,
  ZeroVariance,
  EmptySample,
  GroupTooSmall,
  InfeasiblePacking,
  ParseError,
  IoError,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::EmptySites: return "EmptySites";
    case Errc::NoLabeledSamples: return "NoLabeledSamples";
    case Errc::UndefinedMetric: return "UndefinedMetric";
    case Errc::ZeroArea: return "ZeroArea";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::EmptySample: return "EmptySample";
    case Errc::GroupTooSmall: return "GroupTooSmall";
    case Errc::InfeasiblePacking: return "InfeasiblePacking";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

}  // namespace tlskit
