#include "mkit/error.hpp"

namespace mkit {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::TooShort: return "TooShort";
    case Errc::BadLength: return "BadLength";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::BadParams: return "BadParams";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::FpsMismatch: return "FpsMismatch";
    case Errc::MarkerMismatch: return "MarkerMismatch";
    case Errc::HhiCountMismatch: return "HhiCountMismatch";
    case Errc::DegenerateInterval: return "DegenerateInterval";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyIndex: return "EmptyIndex";
    case Errc::GrammarError: return "GrammarError";
    case Errc::NoWalkableCell: return "NoWalkableCell";
    case Errc::Unreachable: return "Unreachable";
    case Errc::ClientError: return "ClientError";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace mkit
