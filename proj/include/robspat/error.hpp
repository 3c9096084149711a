#pragma once

#include <stdexcept>
#include <string>

namespace robspat {

/// Failure categories; each maps onto one CLI exit status.
enum class ErrorCategory { Usage = 2, Data = 3, Numerical = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCategory::Numerical, what) {}
};

/// The field is identically zero after centering; every statistic is undefined.
class ZeroVariance : public NumericalError {
 public:
  explicit ZeroVariance(const std::string& what = "field has zero variance after centering")
      : NumericalError(what) {}
};

/// A MAD used by GK/GK2 vanished, so the robust correlation is undefined.
class ZeroScale : public NumericalError {
 public:
  explicit ZeroScale(const std::string& what = "robust scale estimate is zero")
      : NumericalError(what) {}
};

}  // namespace robspat
