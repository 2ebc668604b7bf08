#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace socv {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Index or argument outside the admissible set.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A user-supplied callback returned a non-finite or mis-shaped value.
class EvaluationError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, std::size_t node) : Error(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

/// A consistency identity that must hold up to roundoff failed (W symmetry, trace identity).
class IntegrityError : public Error {
public:
  using Error::Error;
};

/// The fundamental matrix and its independently integrated inverse disagree.
class ConditioningError : public IntegrityError {
public:
  ConditioningError(const std::string& what, std::size_t node) : IntegrityError(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

/// The time grid cannot represent a requested chattering period.
class ResolutionError : public Error {
public:
  using Error::Error;
};

class DegenerateFamilyError : public Error {
public:
  using Error::Error;
};

} // namespace socv
