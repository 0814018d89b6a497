#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rpclust {

enum class ErrorCode {
  EmptyInput,
  ZeroMarginal,
  BadShape,
  DimensionTooLarge,
  BadK,
  NotBipartite,
  UncoveredNode,
  EmptyCommunity,
  MalformedRecord,
  EmptyGazetteer,
  DuplicateCity,
  UnknownCity,
  TooFewRecords,
  DegenerateVariance,
  BadFormat,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rpclust
