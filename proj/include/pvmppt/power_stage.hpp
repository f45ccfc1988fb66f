#ifndef PVMPPT_POWER_STAGE_HPP
#define PVMPPT_POWER_STAGE_HPP

// Averaged (non-switching) boost converter and full-bridge inverter models.
// The DC link is held at v_link by the inverter, so the boost duty cycle
// fixes the PV terminal voltage: v_pv = v_link * (1 - d).

#include <algorithm>
#include <cmath>
#include <optional>

#include "pvmppt/error.hpp"
#include "pvmppt/pv_model.hpp"

namespace pvmppt {

struct BoostParams {
  double v_link = 60.0;
  double d_min = 0.05;
  double d_max = 0.95;
  double r_on = 0.10;     // ohm
  double r_l = 0.25;      // ohm
  double v_diode = 0.45;  // V
  double e_sw = 20e-6;    // J per switching event
  double f_sw = 50e3;     // Hz
};

struct InverterParams {
  double f_out = 50.0;
  double v_drop = 0.48;
  double modulation_index = 1.0;
};

struct AcOutput {
  double v_pk = 0.0;
  double v_rms = 0.0;
  double v_pk_pk = 0.0;
  double f_out = 0.0;
};

struct BoostLosses {
  double switch_conduction = 0.0;    // i^2 * r_on * d
  double inductor_conduction = 0.0;  // i^2 * r_l
  double diode_conduction = 0.0;     // v_diode * i * (1 - d)
  double switching = 0.0;            // 2 * e_sw * f_sw

  double conduction() const { return switch_conduction + inductor_conduction + diode_conduction; }
  double total() const { return conduction() + switching; }
};

struct BoostTransfer {
  double p_in = 0.0;
  double p_out = 0.0;
  BoostLosses losses;
  // Empty when p_in == 0.
  std::optional<double> efficiency;
};

inline void validate(const BoostParams& bp) {
  using detail::require;
  constexpr auto code = ErrorCode::InvalidConfig;
  require(std::isfinite(bp.v_link) && bp.v_link > 0.0, code, "stage.v_link", "must be positive");
  require(bp.d_min >= 0.0 && bp.d_min < bp.d_max, code, "stage.d_min", "must satisfy 0 <= d_min < d_max");
  require(bp.d_max < 1.0, code, "stage.d_max", "must be below 1");
  require(bp.r_on >= 0.0, code, "stage.r_on", "must be non-negative");
  require(bp.r_l >= 0.0, code, "stage.r_l", "must be non-negative");
  require(bp.v_diode >= 0.0, code, "stage.v_diode", "must be non-negative");
  require(bp.e_sw >= 0.0, code, "stage.e_sw", "must be non-negative");
  require(bp.f_sw >= 0.0, code, "stage.f_sw", "must be non-negative");
}

inline void validate(const InverterParams& ip) {
  using detail::require;
  constexpr auto code = ErrorCode::InvalidConfig;
  require(std::isfinite(ip.f_out) && ip.f_out > 0.0, code, "inv.f_out", "must be positive");
  require(std::isfinite(ip.v_drop) && ip.v_drop >= 0.0, code, "inv.v_drop", "must be non-negative");
  require(ip.modulation_index > 0.0 && ip.modulation_index <= 1.0, code, "inv.m_index",
          "must lie in (0, 1]");
}

inline double clamp_duty(double d, const BoostParams& bp) {
  return std::clamp(d, bp.d_min, bp.d_max);
}

inline double pv_voltage_from_duty(double d, const BoostParams& bp) {
  if (!(d >= bp.d_min && d <= bp.d_max)) {
    throw Error(ErrorCode::DutyOutOfRange, "duty outside [d_min, d_max]", "duty");
  }
  return bp.v_link * (1.0 - d);
}

/// Inverse of pv_voltage_from_duty.
inline double duty_from_pv_voltage(double v_pv, const BoostParams& bp) {
  const double d = 1.0 - v_pv / bp.v_link;
  if (!(d >= bp.d_min && d <= bp.d_max)) {
    throw Error(ErrorCode::DutyOutOfRange, "voltage unreachable within duty clamps", "v_pv");
  }
  return d;
}

inline BoostTransfer boost_transfer(const OperatingPoint& op_in, double d, const BoostParams& bp) {
  if (!(d >= bp.d_min && d <= bp.d_max)) {
    throw Error(ErrorCode::DutyOutOfRange, "duty outside [d_min, d_max]", "duty");
  }
  BoostTransfer out;
  out.p_in = op_in.p;
  const double i = op_in.i;
  out.losses.switch_conduction = i * i * bp.r_on * d;
  out.losses.inductor_conduction = i * i * bp.r_l;
  out.losses.diode_conduction = bp.v_diode * i * (1.0 - d);
  out.losses.switching = 2.0 * bp.e_sw * bp.f_sw;
  out.p_out = std::max(0.0, out.p_in - out.losses.total());
  if (out.p_in > 0.0) out.efficiency = out.p_out / out.p_in;
  return out;
}

inline AcOutput inverter_output(double v_link, const InverterParams& ip) {
  if (!(v_link > ip.v_drop)) {
    throw Error(ErrorCode::InsufficientLink, "link voltage does not exceed the conduction drop",
                "v_link");
  }
  AcOutput ac;
  ac.v_pk = ip.modulation_index * v_link - ip.v_drop;
  ac.v_rms = ac.v_pk / std::sqrt(2.0);
  ac.v_pk_pk = 2.0 * ac.v_pk;
  ac.f_out = ip.f_out;
  return ac;
}

}  // namespace pvmppt

#endif  // PVMPPT_POWER_STAGE_HPP
