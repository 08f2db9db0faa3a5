#pragma once

#include <stdexcept>
#include <string>

namespace fracwave {

/// A parameter lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// An iterative or series evaluation did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Time grids, truncations or array shapes that do not fit together.
class GridError : public std::invalid_argument {
 public:
  explicit GridError(const std::string& what) : std::invalid_argument(what) {}
};

/// A requested allocation exceeds a configured cap.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracwave
