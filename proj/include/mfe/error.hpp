#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed LIBSVM input or an invalid dataset.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or violated precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The dual solver hit its iteration cap.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::size_t iterations)
      : Error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

/// No candidate feature is admissible under an elimination criterion
/// (separability exhausted, LO infeasible for every candidate, ...).
class NoAdmissibleCandidate : public Error {
 public:
  using Error::Error;
};

}  // namespace mfe
