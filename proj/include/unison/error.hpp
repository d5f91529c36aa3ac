#pragma once

#include <stdexcept>
#include <string>

namespace unison {

// Single error type for the whole library; `kind` identifies the failure
// so callers (and tests) can dispatch without string matching.
struct Error : std::runtime_error {
  enum class Kind {
    Disconnected,
    SelfLoop,
    DuplicateEdge,
    OutOfRange,
    InvalidParams,
    GenerationFailed,
    DomainViolation,
    NodeNotEnabled,
    InvalidPeriod,
    InvalidInitialConfiguration,
    ScriptInvalid,
    BoundsExceeded,
    NotInError,
    NotClean,
    CharacterizationMismatch,
    RootCreationDetected,
    InternalInvariantBroken,
    DuplicateIdentifiers,
    ParseError,
  };

  Kind kind;

  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

}  // namespace unison
