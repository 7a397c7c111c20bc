#pragma once

#include <stdexcept>
#include <string>

namespace chargegrid {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  invalid_parameter,
  calibration_failure,
  numeric_failure,
  conditioning_degenerate,
  not_implemented_by_paper,
  routing_failure,
  snap_failure,
  ingestion,
  fit_failure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& msg)
      : Error(ErrorKind::invalid_parameter, msg) {}
};

class CalibrationFailure : public Error {
 public:
  CalibrationFailure(const std::string& msg, double lo, double hi)
      : Error(ErrorKind::calibration_failure, msg), lo_(lo), hi_(hi) {}

  /// Achievable range of the average charging fraction over the bracket.
  double achievable_lo() const noexcept { return lo_; }
  double achievable_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& msg, double error_estimate)
      : Error(ErrorKind::numeric_failure, msg), error_estimate_(error_estimate) {}

  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class ConditioningDegenerate : public Error {
 public:
  explicit ConditioningDegenerate(const std::string& msg)
      : Error(ErrorKind::conditioning_degenerate, msg) {}
};

class NotImplementedByPaper : public Error {
 public:
  explicit NotImplementedByPaper(const std::string& msg)
      : Error(ErrorKind::not_implemented_by_paper, msg) {}
};

class RoutingFailure : public Error {
 public:
  explicit RoutingFailure(const std::string& msg)
      : Error(ErrorKind::routing_failure, msg) {}
};

class SnapFailure : public Error {
 public:
  explicit SnapFailure(const std::string& msg)
      : Error(ErrorKind::snap_failure, msg) {}
};

class IngestionError : public Error {
 public:
  explicit IngestionError(const std::string& msg)
      : Error(ErrorKind::ingestion, msg) {}
};

class FitFailure : public Error {
 public:
  explicit FitFailure(const std::string& msg)
      : Error(ErrorKind::fit_failure, msg) {}
};

}  // namespace chargegrid
