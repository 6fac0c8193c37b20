#pragma once

#include <stdexcept>
#include <string>

namespace dynamatch {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateEdge : Error {
  using Error::Error;
};
struct MissingEdge : Error {
  using Error::Error;
};
struct RankOutOfBounds : Error {
  using Error::Error;
};
struct NotAlternating : Error {
  using Error::Error;
};
struct InvalidParams : Error {
  using Error::Error;
};
struct InvalidMatching : Error {
  using Error::Error;
};
struct MonotonicityViolation : Error {
  using Error::Error;
};
struct SinkRemoval : Error {
  using Error::Error;
};
struct Unreachable : Error {
  using Error::Error;
};
struct NoAugmentingPath : Error {
  using Error::Error;
};
struct WalkTimeout : Error {
  using Error::Error;
};
struct NotLeftPerfect : Error {
  using Error::Error;
};
struct TooLarge : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct AuditFailure : Error {
  using Error::Error;
};
struct RecourseExceeded : Error {
  using Error::Error;
};

}  // namespace dynamatch
