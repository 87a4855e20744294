#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace setkoop {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs of an operation was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The integrated state became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(double time, std::optional<std::size_t> node = std::nullopt);

  double time() const { return time_; }
  std::optional<std::size_t> node() const { return node_; }

 private:
  double time_;
  std::optional<std::size_t> node_;
};

/// A point left the region where an observable can be evaluated.
class WindowError : public Error {
 public:
  WindowError(std::string what, std::optional<std::size_t> node = std::nullopt)
      : Error(std::move(what)), node_(node) {}

  std::optional<std::size_t> node() const { return node_; }

 private:
  std::optional<std::size_t> node_;
};

}  // namespace setkoop
