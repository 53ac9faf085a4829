#include "ookgate/error.hpp"

namespace ookgate {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NonFinite: return "NonFinite";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EmptyNeighborList: return "EmptyNeighborList";
    case Errc::RankOutOfRange: return "RankOutOfRange";
    case Errc::InvalidTemperature: return "InvalidTemperature";
    case Errc::MetaKindRequiresCalibration: return "MetaKindRequiresCalibration";
    case Errc::EmptySamples: return "EmptySamples";
    case Errc::AlphaOutOfRange: return "AlphaOutOfRange";
    case Errc::EmptyCalibrationSet: return "EmptyCalibrationSet";
    case Errc::NeighborListTooShort: return "NeighborListTooShort";
    case Errc::PValueOutOfRange: return "PValueOutOfRange";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::ChecksumFailure: return "ChecksumFailure";
    case Errc::ZeroSampleSize: return "ZeroSampleSize";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::PoolTooSmall: return "PoolTooSmall";
    case Errc::InvalidChunking: return "InvalidChunking";
    case Errc::EmptyText: return "EmptyText";
    case Errc::EndpointError: return "EndpointError";
    case Errc::DimensionDrift: return "DimensionDrift";
    case Errc::InconsistentAnswerKey: return "InconsistentAnswerKey";
    case Errc::NoSuccessfulParses: return "NoSuccessfulParses";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::InvalidHeader: return "InvalidHeader";
    case Errc::IdCountMismatch: return "IdCountMismatch";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_input_error(Errc code) {
  switch (code) {
    case Errc::IoError:
    case Errc::ParseError:
    case Errc::BadMagic:
    case Errc::TruncatedPayload:
    case Errc::InvalidHeader:
    case Errc::IdCountMismatch:
    case Errc::UnsupportedVersion:
    case Errc::InvariantViolation:
    case Errc::ChecksumFailure:
    case Errc::EmptySamples:
    case Errc::EmptyPool:
    case Errc::PoolTooSmall:
      return true;
    default:
      return false;
  }
}

}  // namespace ookgate
