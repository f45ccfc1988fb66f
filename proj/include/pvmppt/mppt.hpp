#ifndef PVMPPT_MPPT_HPP
#define PVMPPT_MPPT_HPP

// Maximum power point trackers as pure step functions. Each call consumes one
// measurement and returns the next controller state; the duty command lives
// in that state. Duty actuates a boost stage, so raising duty lowers the PV
// terminal voltage.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "pvmppt/error.hpp"
#include "pvmppt/pv_model.hpp"

namespace pvmppt {

enum class MpptVariant { PoFixed, PoModulated, IncCond };

inline std::string_view to_string(MpptVariant v) {
  switch (v) {
    case MpptVariant::PoFixed: return "PoFixed";
    case MpptVariant::PoModulated: return "PoModulated";
    case MpptVariant::IncCond: return "IncCond";
  }
  return "PoFixed";
}

inline std::optional<MpptVariant> parse_variant(std::string_view name) {
  std::string lower;
  for (char c : name) {
    if (c != '_' && c != '-') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "pofixed" || lower == "po") return MpptVariant::PoFixed;
  if (lower == "pomodulated" || lower == "pom") return MpptVariant::PoModulated;
  if (lower == "inccond" || lower == "ic") return MpptVariant::IncCond;
  return std::nullopt;
}

struct MpptConfig {
  MpptVariant variant = MpptVariant::PoFixed;
  double step_d = 0.005;
  double step_d_min = 0.001;
  double step_d_max = 0.02;
  double modulation_gain_k = 2e-4;  // duty per watt
  double epsilon_p = 0.01;          // W
  double epsilon_i = 0.001;         // A
  double sample_period = 0.1;       // s
  double d_init = 0.5;
  // Power-stage duty clamps; the simulation copies these from BoostParams.
  double d_min = 0.05;
  double d_max = 0.95;
};

struct MpptState {
  double prev_v = 0.0;
  double prev_i = 0.0;
  double prev_p = 0.0;
  double duty = 0.5;
  int last_direction = +1;  // sign of the last duty change
  bool initialized = false;
  bool saturated = false;  // last command hit a clamp
  double last_step = 0.0;
};

inline void validate(const MpptConfig& cfg) {
  using detail::require;
  constexpr auto code = ErrorCode::InvalidConfig;
  require(std::isfinite(cfg.step_d) && cfg.step_d > 0.0, code, "mppt.step_d", "must be positive");
  require(std::isfinite(cfg.step_d_min) && cfg.step_d_min > 0.0, code, "mppt.step_d_min",
          "must be positive");
  require(cfg.step_d_min <= cfg.step_d, code, "mppt.step_d_min", "must not exceed mppt.step_d");
  require(std::isfinite(cfg.step_d_max) && cfg.step_d <= cfg.step_d_max, code, "mppt.step_d_max",
          "must not be below mppt.step_d");
  require(cfg.step_d_max < 0.2, code, "mppt.step_d_max", "must be below 0.2");
  require(std::isfinite(cfg.modulation_gain_k) && cfg.modulation_gain_k >= 0.0, code, "mppt.gain_k",
          "must be non-negative");
  require(std::isfinite(cfg.epsilon_p) && cfg.epsilon_p >= 0.0, code, "mppt.epsilon_p",
          "must be non-negative");
  require(std::isfinite(cfg.epsilon_i) && cfg.epsilon_i >= 0.0, code, "mppt.epsilon_i",
          "must be non-negative");
  require(std::isfinite(cfg.sample_period) && cfg.sample_period > 0.0, code, "mppt.sample_period",
          "must be positive");
  require(cfg.d_min < cfg.d_max, code, "stage.d_min", "must be below stage.d_max");
  require(cfg.d_init >= cfg.d_min && cfg.d_init <= cfg.d_max, code, "mppt.d_init",
          "must lie within the duty clamps");
}

inline MpptState initial_state(const MpptConfig& cfg) {
  MpptState s;
  s.duty = cfg.d_init;
  return s;
}

/// Step used by the modulated P&O tracker for an observed power change.
inline double modulated_step_size(double delta_p, const MpptConfig& cfg) {
  return std::clamp(cfg.modulation_gain_k * std::abs(delta_p), cfg.step_d_min, cfg.step_d_max);
}

namespace detail {

inline MpptState remember(MpptState s, const OperatingPoint& meas) {
  s.prev_v = meas.v;
  s.prev_i = meas.i;
  s.prev_p = meas.p;
  return s;
}

inline MpptState move_duty(MpptState s, int direction, double step, const MpptConfig& cfg) {
  const double wanted = s.duty + direction * step;
  s.duty = std::clamp(wanted, cfg.d_min, cfg.d_max);
  s.saturated = s.duty != wanted;
  s.last_direction = direction;
  s.last_step = step;
  return s;
}

inline MpptState hold(MpptState s) {
  s.saturated = false;
  s.last_step = 0.0;
  return s;
}

// First call: no previous sample to compare against, so perturb upward.
inline MpptState bootstrap(MpptState s, const OperatingPoint& meas, const MpptConfig& cfg) {
  s.initialized = true;
  s = move_duty(s, +1, cfg.step_d, cfg);
  return remember(s, meas);
}

template <class StepSize>
MpptState perturb_and_observe(MpptState s, const OperatingPoint& meas, const MpptConfig& cfg,
                              StepSize step_size) {
  if (!s.initialized) return bootstrap(s, meas, cfg);
  const double delta_p = meas.p - s.prev_p;
  if (std::abs(delta_p) <= cfg.epsilon_p) {
    s = hold(s);
  } else {
    const int direction = delta_p > 0.0 ? s.last_direction : -s.last_direction;
    s = move_duty(s, direction, step_size(delta_p), cfg);
  }
  return remember(s, meas);
}

}  // namespace detail

/// Fixed-step perturb & observe: keep the perturbation direction while power
/// rises, reverse it when power falls, hold inside the power dead-band.
inline MpptState po_step(MpptState state, const OperatingPoint& meas, const MpptConfig& cfg) {
  return detail::perturb_and_observe(state, meas, cfg, [&](double) { return cfg.step_d; });
}

/// P&O whose step scales with |dP|, clamped to [step_d_min, step_d_max].
inline MpptState po_modulated_step(MpptState state, const OperatingPoint& meas,
                                   const MpptConfig& cfg) {
  return detail::perturb_and_observe(state, meas, cfg,
                                     [&](double dp) { return modulated_step_size(dp, cfg); });
}

/// Incremental conductance: compare dI/dV with -I/V; they are equal at the MPP.
inline MpptState ic_step(MpptState s, const OperatingPoint& meas, const MpptConfig& cfg) {
  if (!s.initialized) return detail::bootstrap(s, meas, cfg);

  constexpr double kVoltageDeadband = 1e-6;
  // Duty direction: -1 raises PV voltage, +1 lowers it.
  constexpr int kRaiseVoltage = -1;
  constexpr int kLowerVoltage = +1;

  const double dv = meas.v - s.prev_v;
  const double di = meas.i - s.prev_i;
  std::optional<int> direction;

  if (std::abs(dv) <= kVoltageDeadband) {
    if (std::abs(di) > cfg.epsilon_i) direction = di > 0.0 ? kRaiseVoltage : kLowerVoltage;
  } else if (meas.v <= kVoltageDeadband) {
    direction = kRaiseVoltage;
  } else {
    // dI/dV + I/V = (dP/dV) / V: positive left of the MPP.
    const double mismatch = di / dv + meas.i / meas.v;
    if (std::abs(mismatch) > cfg.epsilon_i / meas.v) {
      direction = mismatch > 0.0 ? kRaiseVoltage : kLowerVoltage;
    }
  }

  s = direction ? detail::move_duty(s, *direction, cfg.step_d, cfg) : detail::hold(s);
  return detail::remember(s, meas);
}

inline MpptState mppt_step(const MpptState& state, const OperatingPoint& meas,
                           const MpptConfig& cfg) {
  switch (cfg.variant) {
    case MpptVariant::PoFixed: return po_step(state, meas, cfg);
    case MpptVariant::PoModulated: return po_modulated_step(state, meas, cfg);
    case MpptVariant::IncCond: return ic_step(state, meas, cfg);
  }
  return po_step(state, meas, cfg);
}

/// Owns a tracker's state for use in a closed loop.
class MpptController {
 public:
  explicit MpptController(MpptConfig cfg) : cfg_(cfg), state_(initial_state(cfg_)) {}

  double duty() const { return state_.duty; }
  const MpptState& state() const { return state_; }
  const MpptConfig& config() const { return cfg_; }

  double update(const OperatingPoint& meas) {
    state_ = mppt_step(state_, meas, cfg_);
    return state_.duty;
  }

 private:
  MpptConfig cfg_;
  MpptState state_;
};

}  // namespace pvmppt

#endif  // PVMPPT_MPPT_HPP
