#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace byzsim {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a mathematical function
/// (non-finite input, probability outside (0,1), empty sample, NaN).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An invalid combination of configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// An iterative solver stopped without meeting its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> last_iterate,
              double residual_norm)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        residual_norm_(residual_norm) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual_norm() const noexcept { return residual_norm_; }

 private:
  std::vector<double> last_iterate_;
  double residual_norm_;
};

}  // namespace byzsim
