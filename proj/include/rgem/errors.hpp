#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix required to be positive definite failed Cholesky factorization.
class IndefiniteError : public Error {
 public:
  using Error::Error;
};

/// Input data cannot support the requested model (too few distinct rows, zero variance, ...).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// A mixture component lost (almost) all of its responsibility mass.
class EmptyClusterError : public Error {
 public:
  EmptyClusterError(std::size_t cluster, const std::string& what)
      : Error(what), cluster_(cluster) {}
  std::size_t cluster() const noexcept { return cluster_; }

 private:
  std::size_t cluster_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Every regularization candidate produced a non-factorizable covariance.
class AllCandidatesIndefiniteError : public Error {
 public:
  using Error::Error;
};

/// Argument outside of its mathematical domain (e.g. |rho| >= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rgem
