#include "lfi/error.hpp"

namespace lfi {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::simulation: return "simulation";
    case ErrorKind::training: return "training";
    case ErrorKind::fit: return "fit";
    case ErrorKind::undefined_metric: return "undefined-metric";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::domain:
    case ErrorKind::undefined_metric: return 1;
    case ErrorKind::io: return 2;
    case ErrorKind::numerical:
    case ErrorKind::simulation:
    case ErrorKind::training:
    case ErrorKind::fit: return 3;
  }
  return 3;
}

}  // namespace lfi
