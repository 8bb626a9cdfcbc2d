#include "hdsvm/error.hpp"

namespace hdsvm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownLabelColumn: return "UnknownLabelColumn";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::SingletonClass: return "SingletonClass";
    case ErrorKind::MissingClass: return "MissingClass";
    case ErrorKind::SizeExceedsClass: return "SizeExceedsClass";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSeparable: return "NotSeparable";
    case ErrorKind::DegenerateGram: return "DegenerateGram";
    case ErrorKind::DegenerateSupport: return "DegenerateSupport";
    case ErrorKind::EmptySupportSet: return "EmptySupportSet";
    case ErrorKind::DegenerateDelta: return "DegenerateDelta";
    case ErrorKind::InvalidT: return "InvalidT";
    case ErrorKind::InvalidDf: return "InvalidDf";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::UnknownScenario: return "UnknownScenario";
    case ErrorKind::SweepOutOfGrid: return "SweepOutOfGrid";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace hdsvm
