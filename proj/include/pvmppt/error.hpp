#ifndef PVMPPT_ERROR_HPP
#define PVMPPT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace pvmppt {

enum class ErrorCode {
  InvalidDatasheet,
  NonConvergence,
  InvalidConfig,
  DutyOutOfRange,
  InsufficientLink,
  InvalidSpec,
  MissingBaseline,
  InvalidProfile,
  EmptySeries,
  SimulationFailure,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDatasheet: return "InvalidDatasheet";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DutyOutOfRange: return "DutyOutOfRange";
    case ErrorCode::InsufficientLink: return "InsufficientLink";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::SimulationFailure: return "SimulationFailure";
  }
  return "Unknown";
}

/// Single exception type for the library. `field()` carries the config key
/// of the offending value when one can be named, and is empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

namespace detail {

inline void require(bool ok, ErrorCode code, std::string_view field, std::string_view what) {
  if (!ok) {
    throw Error(code, std::string(field) + ": " + std::string(what), std::string(field));
  }
}

}  // namespace detail

}  // namespace pvmppt

#endif  // PVMPPT_ERROR_HPP
