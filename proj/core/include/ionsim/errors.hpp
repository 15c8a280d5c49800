#pragma once

#include <stdexcept>
#include <string>

namespace ionsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Multi-start minimization failed to reach the force threshold.
struct ConvergenceError : std::runtime_error {
  double best_residual;  // N
  ConvergenceError(const std::string& msg, double residual)
      : std::runtime_error(msg), best_residual(residual) {}
};

// Returned configuration is a stationary point but not a minimum.
struct SaddlePointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Crystal unstable along the probed axis (negative Hessian eigenvalue).
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raman detuning inside the guard band of a normal mode.
struct ResonanceError : std::runtime_error {
  int mode_index;
  ResonanceError(const std::string& msg, int mode)
      : std::runtime_error(msg), mode_index(mode) {}
};

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Phonon population leaked into the top Fock level; retry with larger cutoff.
struct CutoffError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ionsim
