#pragma once

#include <stdexcept>
#include <string>

namespace qruler {

/// Invalid physical or run configuration (even N, nonpositive mass, l >= w, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arguments outside an operation's domain (site too close to an edge, wrong vector length).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameters for which the model's approximations break down.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature or factorization failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qruler
