#pragma once

#include <exception>
#include <optional>
#include <string>

namespace semiswitch {

class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) { compose(); }

  const char* what() const noexcept override { return text_.c_str(); }
  const std::string& message() const { return message_; }
  virtual const char* kind() const noexcept { return "Error"; }

  // Annotates the error with the composite-flow leg that raised it.
  void set_leg(int leg) {
    leg_ = leg;
    compose();
  }
  std::optional<int> leg() const { return leg_; }

 private:
  void compose() {
    text_ = leg_ ? "leg " + std::to_string(*leg_) + ": " + message_ : message_;
  }
  std::string message_;
  std::string text_;
  std::optional<int> leg_;
};

#define SEMISWITCH_ERROR(Name)                                    \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return #Name; }  \
  };

SEMISWITCH_ERROR(BackwardHorizonExceeded)
SEMISWITCH_ERROR(IntegrationDiverged)
SEMISWITCH_ERROR(DepthBudgetExceeded)
SEMISWITCH_ERROR(DomainViolation)
SEMISWITCH_ERROR(NotInK)
SEMISWITCH_ERROR(NoDensity)
SEMISWITCH_ERROR(JumpBudgetExceeded)
SEMISWITCH_ERROR(OutOfRange)
SEMISWITCH_ERROR(NoExpDecay)
SEMISWITCH_ERROR(DiscontinuousLaw)
SEMISWITCH_ERROR(NotAdmissible)
SEMISWITCH_ERROR(ZeroNotInSupport)
SEMISWITCH_ERROR(IrreducibilityPathNotFound)
SEMISWITCH_ERROR(NotContracting)
SEMISWITCH_ERROR(DegenerateThreshold)
SEMISWITCH_ERROR(AxisMismatch)
SEMISWITCH_ERROR(InvalidArgument)
SEMISWITCH_ERROR(ConfigError)

#undef SEMISWITCH_ERROR

}  // namespace semiswitch
