#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opsteer {

enum class Errc {
  InvalidInput,
  NegativeWeight,
  NotStronglyConnected,
  SingularSystem,
  NotStochastic,
  DegenerateMixing,
  InvalidRange,
  InadmissibleControl,
  StateOutOfBox,
  ZeroControl,
  AtTarget,
  GainTooLarge,
  InvalidGain,
  NumericFailure,
  StalledCycle,
  ConfigInvalid,
  Io,
};

std::string_view to_string(Errc code);

// Numeric failures map to CLI exit code 2, everything else to 1.
bool is_numeric(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace opsteer
