#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace splinesde {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or input data (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Which function's support was left. Only `Potential` exceedances are
/// recoverable by doubling the drift-potential domain.
enum class DomainKind { Unspecified, Potential, Lamperti };

class DomainExceeded : public Error {
 public:
  DomainExceeded(double value, double lower, double upper,
                 DomainKind kind = DomainKind::Unspecified);

  double value() const noexcept { return value_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  DomainKind kind() const noexcept { return kind_; }

 private:
  double value_;
  double lower_;
  double upper_;
  DomainKind kind_;
};

/// Path-space rejection sampler failed to accept within its attempt budget.
class RejectionStall : public Error {
 public:
  RejectionStall(std::size_t interval, std::size_t attempts, double r,
                 double r_plus);

  std::size_t interval() const noexcept { return interval_; }
  std::size_t attempts() const noexcept { return attempts_; }
  double r() const noexcept { return r_; }
  double r_plus() const noexcept { return r_plus_; }

 private:
  std::size_t interval_;
  std::size_t attempts_;
  double r_;
  double r_plus_;
};

/// The joint density is zero at the requested point, so no gradient exists.
class GradientUndefined : public Error {
 public:
  using Error::Error;
};

/// Numerical failure that cannot be recovered automatically (CLI exit code 3).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace splinesde
