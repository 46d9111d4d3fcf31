#pragma once

#include <stdexcept>
#include <string>

namespace irispad {

enum class ErrorCode {
  // imageio
  UnsupportedFormat,
  CorruptFile,
  DepthMismatch,
  DuplicateSampleId,
  MissingFile,
  MalformedRow,
  IoError,
  // geometry / masks
  InvalidGeometry,
  DimensionMismatch,
  // stereo
  RankDeficient,
  NonFiniteInput,
  InvalidRig,
  // score
  EmptyRegion,
  DegenerateRegion,
  AllZeroWeights,
  // areas
  SingleClassDataset,
  AllSectorsDegenerate,
  // eval
  SingleClass,
  InsufficientData,
  TagMismatch,
  // synth / config
  InvalidSpec,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::DepthMismatch: return "DepthMismatch";
    case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidRig: return "InvalidRig";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::AllSectorsDegenerate: return "AllSectorsDegenerate";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::TagMismatch: return "TagMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Error";
}

}  // namespace irispad
