#pragma once

#include <stdexcept>
#include <string>

namespace genb {

enum class Errc {
  MissingAsset,
  CorruptHeader,
  ResolutionMismatch,
  IoError,
  InvalidProvenance,
  DegenerateMesh,
  EmptyReference,
  EmptyMask,
  InvalidStrength,
  ShapeMismatch,
  BackendError,
  UnsupportedControl,
  UnknownPart,
  TooFewSamples,
  DimensionMismatch,
  IndefiniteCovariance,
  EmptyDataset,
  InvalidConfig,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::MissingAsset: return "MissingAsset";
    case Errc::CorruptHeader: return "CorruptHeader";
    case Errc::ResolutionMismatch: return "ResolutionMismatch";
    case Errc::IoError: return "IoError";
    case Errc::InvalidProvenance: return "InvalidProvenance";
    case Errc::DegenerateMesh: return "DegenerateMesh";
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::InvalidStrength: return "InvalidStrength";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::BackendError: return "BackendError";
    case Errc::UnsupportedControl: return "UnsupportedControl";
    case Errc::UnknownPart: return "UnknownPart";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::IndefiniteCovariance: return "IndefiniteCovariance";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace genb
