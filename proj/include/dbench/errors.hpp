#pragma once

#include <stdexcept>
#include <string>

namespace dbench {

/// Input could not be parsed (malformed JSON, missing field).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed input violates a structural invariant. The message names the entity.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory log is missing data the metrics need.
class MalformedLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pose is too far from the route to project onto it.
class OffRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An actions map named an actor that is not controllable.
class UnknownActorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// External policy process failed the wire protocol.
class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line usage problem (bad flag combination, empty input list).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dbench
