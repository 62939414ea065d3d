#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dvfinv {

enum class Errc {
  InvalidArgument,
  OutOfBounds,
  EmptyDomain,
  EmptyField,
  InfeasibleControl,
  GeometryMismatch,
  InvalidSpec,
  HeaderMismatch,
  TruncatedPayload,
  UnsupportedSampleType,
  IndexOutOfRange,
  IoFailure,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// command-line layer can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::EmptyDomain: return "EmptyDomain";
    case Errc::EmptyField: return "EmptyField";
    case Errc::InfeasibleControl: return "InfeasibleControl";
    case Errc::GeometryMismatch: return "GeometryMismatch";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::HeaderMismatch: return "HeaderMismatch";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::UnsupportedSampleType: return "UnsupportedSampleType";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace dvfinv
