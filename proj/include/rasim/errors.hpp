#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rasim {

/// Invalid scenario, episode or CLI configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Geometric input that has no defined answer (coincident points, empty lines).
class DegenerateInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Query point lies outside the road bounds expanded by one lane width.
class OutOfRoad : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Request lifecycle violation, e.g. slotting a resolved request.
class InvalidTransition : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Summary requested before the episode ended.
class NotEnded : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Malformed log, report or recording line. Carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Wire message that cannot be decoded.
class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class VersionMismatch : public ProtocolError {
public:
  VersionMismatch(const std::string& expected, const std::string& found)
      : ProtocolError("protocol version mismatch: this build speaks " + expected + ", recording has " + found) {}
};

/// A live session could not start, e.g. the listen port is taken.
class StartupError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace rasim
