#include "opsteer/error.hpp"

namespace opsteer {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::NegativeWeight: return "NegativeWeight";
    case Errc::NotStronglyConnected: return "NotStronglyConnected";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NotStochastic: return "NotStochastic";
    case Errc::DegenerateMixing: return "DegenerateMixing";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::InadmissibleControl: return "InadmissibleControl";
    case Errc::StateOutOfBox: return "StateOutOfBox";
    case Errc::ZeroControl: return "ZeroControl";
    case Errc::AtTarget: return "AtTarget";
    case Errc::GainTooLarge: return "GainTooLarge";
    case Errc::InvalidGain: return "InvalidGain";
    case Errc::NumericFailure: return "NumericFailure";
    case Errc::StalledCycle: return "StalledCycle";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_numeric(Errc code) {
  switch (code) {
    case Errc::SingularSystem:
    case Errc::NotStochastic:
    case Errc::DegenerateMixing:
    case Errc::InadmissibleControl:
    case Errc::StateOutOfBox:
    case Errc::ZeroControl:
    case Errc::AtTarget:
    case Errc::GainTooLarge:
    case Errc::InvalidGain:
    case Errc::NumericFailure:
    case Errc::StalledCycle:
      return true;
    default:
      return false;
  }
}

}  // namespace opsteer
