#pragma once

#include <stdexcept>
#include <string>

namespace pacbound {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed or out-of-range user input (datasets, query points).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Exact enumeration would exceed the configured cost cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// No feasible parameter value produced a finite bound.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Canonical SVM training failed: the data admits no separating hyperplane.
class NonSeparableError : public std::runtime_error {
 public:
  explicit NonSeparableError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pacbound
