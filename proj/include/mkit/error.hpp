#pragma once

#include <stdexcept>
#include <string>

namespace mkit {

enum class Errc {
  LengthMismatch,
  TooShort,
  BadLength,
  EmptyInput,
  IndexOutOfRange,
  BadParams,
  OutOfBounds,
  FpsMismatch,
  MarkerMismatch,
  HhiCountMismatch,
  DegenerateInterval,
  DimensionMismatch,
  EmptyIndex,
  GrammarError,
  NoWalkableCell,
  Unreachable,
  ClientError,
  ParseError,
  IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace mkit
