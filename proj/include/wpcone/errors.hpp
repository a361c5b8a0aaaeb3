#pragma once

#include <stdexcept>
#include <string>

namespace wpcone {

/// Bad user input: unstable signature, angle outside (0, pi], slot out of range.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Something that must hold by construction did not (assembly bug, non-positive volume).
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

/// Quadrature failed to reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wpcone
