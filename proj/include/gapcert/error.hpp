#pragma once

#include <stdexcept>
#include <string>

namespace gapcert {

enum class ErrorKind {
  InvalidArgument,  // caller broke a precondition
  Rejected,         // input is well-formed but fails a model contract
  Numerical,        // iteration failed to converge, non-finite values, ...
  Config,           // malformed configuration document
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void reject(const std::string& what) {
  throw Error(ErrorKind::Rejected, what);
}

[[noreturn]] inline void invalid_argument(const std::string& what) {
  throw Error(ErrorKind::InvalidArgument, what);
}

[[noreturn]] inline void numerical_failure(const std::string& what) {
  throw Error(ErrorKind::Numerical, what);
}

[[noreturn]] inline void config_error(const std::string& what) {
  throw Error(ErrorKind::Config, what);
}

}  // namespace gapcert
