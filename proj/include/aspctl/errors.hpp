#pragma once

#include <stdexcept>
#include <string>

namespace aspctl {

// Syntax or safety problem in program text, online updates, or config files.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + what),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// Raised while instantiating rules (depth cap, arithmetic over non-integers).
class GroundingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violation of the online update or wire protocol (out-of-order steps,
// undeclared externals, malformed blocks).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No model exists within the configured horizon cap.
class HorizonCapExceeded : public std::runtime_error {
 public:
  explicit HorizonCapExceeded(int cap)
      : std::runtime_error("no model within horizon cap " + std::to_string(cap)), cap_(cap) {}

  int cap() const { return cap_; }

 private:
  int cap_;
};

// Misuse of the controller, bus, or world APIs.
class ControlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aspctl
