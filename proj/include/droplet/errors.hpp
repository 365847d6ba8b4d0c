#pragma once

#include <stdexcept>
#include <string>

namespace droplet {

// Invalid argument for a mathematical operation (out of domain, overflow risk).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameters lie in a phase where the requested quantity is undefined.
class PhaseError : public std::runtime_error {
 public:
  explicit PhaseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameters too close to a phase boundary for the expansion to be meaningful.
class NearCriticalError : public PhaseError {
 public:
  explicit NearCriticalError(const std::string& msg) : PhaseError(msg) {}
};

// An iterative solver failed to converge.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// A quadrature or summation could not reach its target tolerance.
class ToleranceError : public SolverError {
 public:
  explicit ToleranceError(const std::string& msg) : SolverError(msg) {}
};

}  // namespace droplet
