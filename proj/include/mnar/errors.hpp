#ifndef MNAR_ERRORS_HPP
#define MNAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mnar {

// Base of every error raised by the library. Callers that only care about
// "something in the estimation pipeline went wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter outside its declared domain, or a malformed outcome.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a precondition (e.g. asked for a truncated probability of
// the nonresponse cell).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// P_theta(response) == 0, so the truncated density is undefined.
class SingularParameter : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// An observed outcome has zero probability under every grid point.
class ImpossibleOutcome : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class DegenerateData : public Error {
 public:
  using Error::Error;
};

class UndefinedPosterior : public Error {
 public:
  using Error::Error;
};

class ExperimentError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value; `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace mnar

#endif  // MNAR_ERRORS_HPP
