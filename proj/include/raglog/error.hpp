#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raglog {

enum class Errc {
  EmptyLine,
  NoMessage,
  IoError,
  FormatError,
  DegenerateSplit,
  RemoteError,
  Unavailable,
  DimMismatch,
  DescriptorMismatch,
  DuplicateId,
  EmptyStore,
  VersionMismatch,
  CorruptStore,
  TooFewPoints,
  EmptyInput,
  InvalidTemplate,
  NoVerdict,
  AmbiguousVerdict,
  ClassificationError,
  LengthMismatch,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyLine: return "EmptyLine";
    case Errc::NoMessage: return "NoMessage";
    case Errc::IoError: return "IoError";
    case Errc::FormatError: return "FormatError";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::RemoteError: return "RemoteError";
    case Errc::Unavailable: return "Unavailable";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::DescriptorMismatch: return "DescriptorMismatch";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::EmptyStore: return "EmptyStore";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptStore: return "CorruptStore";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidTemplate: return "InvalidTemplate";
    case Errc::NoVerdict: return "NoVerdict";
    case Errc::AmbiguousVerdict: return "AmbiguousVerdict";
    case Errc::ClassificationError: return "ClassificationError";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace raglog
