#pragma once

#include <cstddef>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace localmart {

// Out-of-range model or algorithm parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation outside the domain on which an object is defined
// (grid horizon, map domain, non-adapted event use).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Strategy legs that are out of order or overlap on some path.
class StructuralError : public std::runtime_error {
 public:
  StructuralError(const std::string& what, std::size_t path)
      : std::runtime_error(what + " (path " + std::to_string(path) + ")"), path_(path) {}
  std::size_t path() const noexcept { return path_; }

 private:
  std::size_t path_;
};

// A declared constraint (short-sale restriction, measurability) is violated.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constructive algorithm refuses to run because its precondition fails.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public RefusalError {
 public:
  BudgetExceeded(const std::string& what, double needed)
      : RefusalError(what + ": " + format_count(needed) + " candidates needed"), needed_(needed) {}
  double needed() const noexcept { return needed_; }

 private:
  static std::string format_count(double n) {
    std::ostringstream os;
    os << std::setprecision(15) << n;
    return os.str();
  }
  double needed_;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scenario file error with the 1-based line it was found on.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace localmart
