#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace homsim {

enum class ErrorKind {
  occupation_exceeds_cutoff,
  layout_mismatch,
  dimension_guard_exceeded,
  zero_norm_state,
  same_mode,
  non_unitary_param,
  cutoff_too_small,
  not_normalized,
  derivative_vanishes,
  invalid_argument,
  config_invalid,
  grid_too_large,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::occupation_exceeds_cutoff: return "OccupationExceedsCutoff";
    case ErrorKind::layout_mismatch: return "LayoutMismatch";
    case ErrorKind::dimension_guard_exceeded: return "DimensionGuardExceeded";
    case ErrorKind::zero_norm_state: return "ZeroNormState";
    case ErrorKind::same_mode: return "SameModeError";
    case ErrorKind::non_unitary_param: return "NonUnitaryParam";
    case ErrorKind::cutoff_too_small: return "CutoffTooSmall";
    case ErrorKind::not_normalized: return "NotNormalized";
    case ErrorKind::derivative_vanishes: return "DerivativeVanishes";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::config_invalid: return "ConfigInvalid";
    case ErrorKind::grid_too_large: return "GridTooLarge";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so callers (and the
// CLI's exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace homsim
