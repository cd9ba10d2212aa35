#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTopology : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

// Raised when an invariant that holds by construction is observed broken.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

}  // namespace dsm
