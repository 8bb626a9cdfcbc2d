#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdsvm {

enum class ErrorKind {
  InvalidArgument,
  ParseError,
  UnknownLabelColumn,
  IoError,
  SingletonClass,
  MissingClass,
  SizeExceedsClass,
  EmptyTestSet,
  DimensionMismatch,
  NotSeparable,
  DegenerateGram,
  DegenerateSupport,
  EmptySupportSet,
  DegenerateDelta,
  InvalidT,
  InvalidDf,
  FactorizationFailure,
  UnknownScenario,
  SweepOutOfGrid,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix, for re-raising with added context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace hdsvm
