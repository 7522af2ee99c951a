#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rampguard {

enum class ErrorCategory {
  config,       // invalid parameters or unknown ids
  domain,       // argument outside the mathematical domain of an operation
  parse,        // malformed scenario / tuning / certificate text
  unit,         // unknown or mismatched unit
  cfl,          // time step above the stability bound
  breakdown,    // plant left the physical regime
  calibration,  // threshold calibration not possible
  io,
  usage,
};

std::string_view category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class CflViolation : public Error {
 public:
  CflViolation(double requested_dt, double max_dt);
  double requested_dt() const noexcept { return requested_dt_; }
  double max_dt() const noexcept { return max_dt_; }

 private:
  double requested_dt_;
  double max_dt_;
};

class ModelBreakdown : public Error {
 public:
  ModelBreakdown(double t, int cell, double velocity);
  double time() const noexcept { return t_; }
  int cell() const noexcept { return cell_; }

 private:
  double t_;
  int cell_;
};

}  // namespace rampguard
