#pragma once

#include <stdexcept>
#include <string>

namespace teardrop {

enum class ErrorKind {
  InvalidArgument,  // malformed input (non-finite, empty, wrong sizes)
  Domain,           // input outside the mathematical domain of an operation
  NoSolution,       // a root or admissible object could not be bracketed
  Divergence,       // an iteration or integration left its safe regime
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace teardrop
