#pragma once

#include <stdexcept>
#include <string>

namespace glottal {

enum class ErrorKind {
  kFormat,
  kUnsupportedCodec,
  kEmptySignal,
  kTooShort,
  kInvalidArgument,
  kUnvoiced,
  kDegenerateFrame,
  kSingularSystem,
  kInsufficientEpochs,
  kAmplitudeQuotient,
  kSynthesis,
  kSingleClass,
  kDimensionMismatch,
  kDegenerateFolds,
  kIo,
  kConfig,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace glottal
