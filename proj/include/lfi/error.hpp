#pragma once

#include <stdexcept>
#include <string>

namespace lfi {

enum class ErrorKind {
  configuration,  // invalid user input, shape mismatch, unsupported option
  domain,         // argument outside the mathematical domain of an operation
  numerical,      // factorization failure, degenerate posterior
  simulation,     // divergent trajectory
  training,       // non-finite loss while training the network
  fit,            // ratio-model solver did not converge
  undefined_metric,  // evaluation metric has no value for the given inputs
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Process exit status: 1 for invalid input, 2 for I/O, 3 for numerical,
/// simulation, training and fit failures.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace lfi
