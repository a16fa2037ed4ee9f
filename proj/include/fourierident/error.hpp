#pragma once

#include <stdexcept>
#include <string>

namespace fident {

enum class ErrorKind {
  InvalidData,
  InvalidParameter,
  Parse,
  ShapeMismatch,
  DynamicRange,
  SimulationDiverged,
  EmptySystem,
  Underdetermined,
  InvalidSparsity,
  TooFewModes,
  KernelTooNarrow,
  UndefinedTruth,
  IdentificationFailed,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidData: return "invalid-data";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::DynamicRange: return "dynamic-range";
    case ErrorKind::SimulationDiverged: return "simulation-diverged";
    case ErrorKind::EmptySystem: return "empty-system";
    case ErrorKind::Underdetermined: return "underdetermined";
    case ErrorKind::InvalidSparsity: return "invalid-sparsity";
    case ErrorKind::TooFewModes: return "too-few-modes";
    case ErrorKind::KernelTooNarrow: return "kernel-too-narrow";
    case ErrorKind::UndefinedTruth: return "undefined-truth";
    case ErrorKind::IdentificationFailed: return "identification-failed";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fident
