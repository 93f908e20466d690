#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace triodflow {

/// Raised when an element chord is shorter than the regularity guard.
class DegenerateElement : public std::runtime_error {
 public:
  DegenerateElement(std::size_t curve, std::size_t element, double chord)
      : std::runtime_error("degenerate element: curve " + std::to_string(curve) + ", element " +
                           std::to_string(element) + ", chord length " + std::to_string(chord)),
        curve_(curve),
        element_(element) {}

  std::size_t curve() const noexcept { return curve_; }
  std::size_t element() const noexcept { return element_; }

 private:
  std::size_t curve_;
  std::size_t element_;
};

class CgDidNotConverge : public std::runtime_error {
 public:
  CgDidNotConverge(std::size_t iterations, double residual)
      : std::runtime_error("CG did not converge after " + std::to_string(iterations) +
                           " iterations (relative residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidSequence : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonpositiveDiagonal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace triodflow
