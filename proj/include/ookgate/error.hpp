#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ookgate {

enum class Errc {
  // vecstore
  DimensionMismatch,
  ZeroVector,
  NonFinite,
  EmptyCorpus,
  DuplicateId,
  InvalidArgument,
  // statistics
  EmptyNeighborList,
  RankOutOfRange,
  InvalidTemperature,
  MetaKindRequiresCalibration,
  // calibration
  EmptySamples,
  AlphaOutOfRange,
  EmptyCalibrationSet,
  NeighborListTooShort,
  PValueOutOfRange,
  InvariantViolation,
  UnsupportedVersion,
  ChecksumFailure,
  // drift / metrics
  ZeroSampleSize,
  EmptyClass,
  EmptyPool,
  PoolTooSmall,
  // ingest
  InvalidChunking,
  EmptyText,
  EndpointError,
  DimensionDrift,
  InconsistentAnswerKey,
  NoSuccessfulParses,
  BadMagic,
  TruncatedPayload,
  InvalidHeader,
  IdCountMismatch,
  // generic input problems
  IoError,
  ParseError,
};

std::string_view to_string(Errc code);

// True for errors caused by unreadable or malformed inputs rather than by the
// computation itself. The CLI maps these to exit code 2.
bool is_input_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ookgate
