#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace minv {

enum class ErrorCode {
  ZeroMass,
  DimensionMismatch,
  RangeEscape,
  InvalidMeasure,
  InvalidDomain,
  RankDeficient,
  InvalidArgument,
  SupportMismatch,
  InfiniteBound,
  SolverStall,
  NotConverged,
  EmptyRangeMass,
  RangeMismatch,
  EmptyFiber,
  PriorVanishes,
  TooLarge,
  UnsupportedData,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (notably the CLI) can map it to an exit status without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace minv
