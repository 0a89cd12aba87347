#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tmap {

/// Base class for every error raised by the library. Callers that drive
/// long experiments can prepend context (component, observation, particle)
/// while an error unwinds and rethrow the same object.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what), message_(what) {}

  const char* what() const noexcept override { return message_.c_str(); }

  void add_context(const std::string& context) { message_ = context + ": " + message_; }

 private:
  std::string message_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class MonotonicityError : public Error {
 public:
  using Error::Error;
};

class NonconvergenceError : public Error {
 public:
  NonconvergenceError(const std::string& what, std::size_t component)
      : Error(what), component_(component) {}

  std::size_t component() const { return component_; }

 private:
  std::size_t component_;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmap
