#ifndef PVMPPT_SIM_ENGINE_HPP
#define PVMPPT_SIM_ENGINE_HPP

// Closed-loop daily simulation: environment profile -> PV module -> boost
// stage, with an MPPT controller closing the loop on the duty cycle.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <future>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvmppt/error.hpp"
#include "pvmppt/mppt.hpp"
#include "pvmppt/power_stage.hpp"
#include "pvmppt/pv_model.hpp"

namespace pvmppt {

struct CloudEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  double attenuation = 0.0;  // fraction of irradiance removed
};

struct ProfileSpec {
  double duration_s = 86400.0;
  double dt_s = 1.0;
  double sunrise_s = 6.0 * 3600.0;
  double sunset_s = 18.0 * 3600.0;
  double g_peak = 1000.0;
  double t_ambient_c = 20.0;
  std::vector<CloudEvent> cloud_events;
  double temp_coupling = 0.02;  // degC per W/m^2
  // Irradiance is sampled and held over blocks of this length, like a logged
  // weather series. 0 evaluates the profile continuously.
  double hold_s = 60.0;
};

struct SimConfig {
  PvDatasheet pv;
  MpptConfig mppt;
  BoostParams stage;
  InverterParams inverter;
  ProfileSpec profile;
};

struct SimRow {
  double t = 0.0;
  EnvSample env;
  OperatingPoint pv;
  double duty = 0.0;
  double p_mpp = 0.0;
  double p_out = 0.0;
};

struct Metrics {
  double rms_power_w = 0.0;
  std::optional<double> mppt_efficiency;
  std::optional<double> converter_efficiency;
  std::optional<double> steady_ripple_w;
};

struct SimResult {
  std::vector<SimRow> series;
  Metrics metrics;
  std::size_t controller_period_steps = 1;
};

/// Anything that turns a measured operating point into the next duty command.
template <class C>
concept DutyController = requires(C c, const OperatingPoint& op) {
  { c.duty() } -> std::convertible_to<double>;
  { c.update(op) } -> std::convertible_to<double>;
};

inline constexpr std::size_t kSteadyWindowPeriods = 20;

inline void validate(const ProfileSpec& p) {
  using detail::require;
  constexpr auto code = ErrorCode::InvalidProfile;
  require(std::isfinite(p.dt_s) && p.dt_s > 0.0, code, "profile.dt_s", "must be positive");
  require(std::isfinite(p.duration_s) && p.duration_s >= p.dt_s, code, "profile.duration_s",
          "must cover at least one step");
  require(std::isfinite(p.sunrise_s) && p.sunrise_s >= 0.0, code, "profile.sunrise_s",
          "must be non-negative");
  require(std::isfinite(p.sunset_s) && p.sunrise_s < p.sunset_s, code, "profile.sunset_s",
          "must be after sunrise");
  require(p.sunset_s <= p.duration_s, code, "profile.sunset_s", "must not exceed the duration");
  require(std::isfinite(p.g_peak) && p.g_peak >= 0.0, code, "profile.g_peak", "must be non-negative");
  require(std::isfinite(p.t_ambient_c) && p.t_ambient_c >= -40.0 && p.t_ambient_c <= 120.0, code,
          "profile.t_ambient_c", "must lie in [-40, 120] degC");
  require(std::isfinite(p.temp_coupling) && p.temp_coupling >= 0.0, code, "profile.temp_coupling",
          "must be non-negative");
  require(std::isfinite(p.hold_s) && p.hold_s >= 0.0, code, "profile.hold_s", "must be non-negative");
  for (const auto& c : p.cloud_events) {
    require(c.attenuation >= 0.0 && c.attenuation <= 1.0, code, "profile.cloud",
            "attenuation must lie in [0, 1]");
    require(c.start_s < c.end_s, code, "profile.cloud", "event must end after it starts");
  }
}

/// Environment at time t: sin^2 daylight shape, cloud attenuation, and cell
/// temperature rising linearly with irradiance.
inline EnvSample environment_at(const ProfileSpec& spec, double t) {
  const double ts = spec.hold_s > 0.0 ? std::floor(t / spec.hold_s + 1e-9) * spec.hold_s : t;
  double g = 0.0;
  if (ts >= spec.sunrise_s && ts <= spec.sunset_s) {
    const double s = std::sin(std::numbers::pi * (ts - spec.sunrise_s) / (spec.sunset_s - spec.sunrise_s));
    g = spec.g_peak * s * s;
  }
  for (const auto& c : spec.cloud_events) {
    if (ts >= c.start_s && ts < c.end_s) g *= 1.0 - c.attenuation;
  }
  return {g, spec.t_ambient_c + spec.temp_coupling * g, t};
}

inline std::size_t profile_length(const ProfileSpec& spec) {
  return static_cast<std::size_t>(std::ceil(spec.duration_s / spec.dt_s - 1e-9));
}

inline std::vector<EnvSample> generate_profile(const ProfileSpec& spec) {
  validate(spec);
  const std::size_t n = profile_length(spec);
  std::vector<EnvSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(environment_at(spec, static_cast<double>(k) * spec.dt_s));
  return out;
}

/// Controller acts every ceil(sample_period / dt) simulation steps.
inline std::size_t controller_period_steps(double sample_period, double dt) {
  const double ratio = std::ceil(sample_period / dt - 1e-9);
  return ratio < 1.0 ? 1 : static_cast<std::size_t>(ratio);
}

namespace detail {

inline double trapezoid(std::span<const SimRow> rows, double (*f)(const SimRow&)) {
  double sum = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    sum += 0.5 * (rows[k].t - rows[k - 1].t) * (f(rows[k]) + f(rows[k - 1]));
  }
  return sum;
}

inline bool same_env(const EnvSample& a, const EnvSample& b) {
  return a.irradiance_g == b.irradiance_g && a.cell_temp_c == b.cell_temp_c;
}

}  // namespace detail

/// Metrics over a logged series. Steady-state ripple averages max(p) - min(p)
/// over every sunlit stretch of constant environment that is at least
/// `min_window_samples` long.
inline Metrics compute_metrics(std::span<const SimRow> rows,
                               std::size_t min_window_samples = kSteadyWindowPeriods) {
  if (rows.empty()) throw Error(ErrorCode::EmptySeries, "no samples to summarise");

  Metrics m;
  double sum_sq = 0.0;
  std::size_t daylight = 0;
  for (const auto& r : rows) {
    if (r.env.irradiance_g > 0.0) {
      sum_sq += r.pv.p * r.pv.p;
      ++daylight;
    }
  }
  if (daylight > 0) m.rms_power_w = std::sqrt(sum_sq / static_cast<double>(daylight));

  const double e_pv = detail::trapezoid(rows, [](const SimRow& r) { return r.pv.p; });
  const double e_mpp = detail::trapezoid(rows, [](const SimRow& r) { return r.p_mpp; });
  const double e_out = detail::trapezoid(rows, [](const SimRow& r) { return r.p_out; });
  // The oracle is the supremum; anything above 1 is oracle search tolerance.
  if (e_mpp > 0.0) m.mppt_efficiency = std::min(1.0, e_pv / e_mpp);
  if (e_pv > 0.0) m.converter_efficiency = e_out / e_pv;

  double ripple_sum = 0.0;
  std::size_t windows = 0;
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin + 1;
    while (end < rows.size() && detail::same_env(rows[end].env, rows[begin].env)) ++end;
    if (rows[begin].env.irradiance_g > 0.0 && end - begin >= std::max<std::size_t>(min_window_samples, 1)) {
      double lo = rows[begin].pv.p;
      double hi = lo;
      for (std::size_t k = begin; k < end; ++k) {
        lo = std::min(lo, rows[k].pv.p);
        hi = std::max(hi, rows[k].pv.p);
      }
      ripple_sum += hi - lo;
      ++windows;
    }
    begin = end;
  }
  if (windows > 0) m.steady_ripple_w = ripple_sum / static_cast<double>(windows);
  return m;
}

/// PV-side operating point the averaged plant settles at for a commanded
/// terminal voltage. The boost input diode blocks reverse current, so above
/// open circuit the module simply delivers nothing.
inline OperatingPoint plant_operating_point(const DiodeParams& params, const EnvSample& env,
                                            double v_cmd, double v_oc) {
  if (v_cmd >= v_oc) return OperatingPoint::at(v_cmd, 0.0);
  return OperatingPoint::at(v_cmd, std::max(0.0, pv_current(params, env, v_cmd)));
}

inline void validate(const SimConfig& cfg) {
  validate(cfg.pv);
  validate(cfg.stage);
  validate(cfg.inverter);
  validate(cfg.mppt);
  validate(cfg.profile);
  detail::require(cfg.mppt.d_min == cfg.stage.d_min && cfg.mppt.d_max == cfg.stage.d_max,
                  ErrorCode::InvalidConfig, "stage.d_min", "controller clamps differ from the stage");
}

/// Runs the closed loop with a caller-supplied controller. The duty applied
/// at step k was computed from measurements of steps before k.
template <DutyController Controller>
SimResult run_simulation_with(const SimConfig& cfg, Controller& controller) {
  validate(cfg);
  const DiodeParams params = extract_params(cfg.pv);
  const auto profile = generate_profile(cfg.profile);

  SimResult result;
  result.controller_period_steps = controller_period_steps(cfg.mppt.sample_period, cfg.profile.dt_s);
  result.series.reserve(profile.size());

  std::optional<EnvSample> cached_env;
  double v_oc = 0.0;
  double p_mpp = 0.0;
  double duty = controller.duty();

  for (std::size_t k = 0; k < profile.size(); ++k) {
    const EnvSample& env = profile[k];
    try {
      if (!cached_env || !detail::same_env(*cached_env, env)) {
        v_oc = open_circuit_voltage(params, env);
        p_mpp = mpp_oracle(params, env).p;
        cached_env = env;
      }
      const double v_cmd = pv_voltage_from_duty(duty, cfg.stage);
      const OperatingPoint op = plant_operating_point(params, env, v_cmd, v_oc);
      const BoostTransfer bt = boost_transfer(op, duty, cfg.stage);
      result.series.push_back({env.t, env, op, duty, p_mpp, bt.p_out});

      if (k % result.controller_period_steps == 0) duty = controller.update(op);
    } catch (const Error& e) {
      throw Error(ErrorCode::SimulationFailure, "step " + std::to_string(k) + ": " + e.what(),
                  e.field());
    }
  }
  result.metrics = compute_metrics(result.series, kSteadyWindowPeriods * result.controller_period_steps);
  return result;
}

inline SimConfig with_stage_clamps(SimConfig cfg) {
  cfg.mppt.d_min = cfg.stage.d_min;
  cfg.mppt.d_max = cfg.stage.d_max;
  return cfg;
}

inline SimResult run_simulation(const SimConfig& cfg) {
  MpptController controller(cfg.mppt);
  return run_simulation_with(cfg, controller);
}

/// One independent run per variant, executed concurrently; results come back
/// in the order the variants were given.
inline std::vector<SimResult> run_variants(const SimConfig& cfg, std::span<const MpptVariant> variants) {
  std::vector<std::future<SimResult>> jobs;
  jobs.reserve(variants.size());
  for (MpptVariant v : variants) {
    SimConfig c = cfg;
    c.mppt.variant = v;
    jobs.push_back(std::async(std::launch::async, [c] { return run_simulation(c); }));
  }
  std::vector<SimResult> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace pvmppt

#endif  // PVMPPT_SIM_ENGINE_HPP
