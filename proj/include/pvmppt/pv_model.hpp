#ifndef PVMPPT_PV_MODEL_HPP
#define PVMPPT_PV_MODEL_HPP

// Five-parameter single-diode PV module model.
//
//   I = Iph - I0 * (exp((V + I*Rs) / a) - 1) - (V + I*Rs) / Rsh
//
// with a = n * Ns * k * T / q. Photocurrent scales linearly with irradiance
// and with (1 + alpha_isc * (T - 25)); the saturation current follows the
// cubic-temperature / bandgap law. The bandgap is calibrated from the
// datasheet's open-circuit voltage coefficient so that dVoc/dT at STC matches
// beta_voc * Voc.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "pvmppt/error.hpp"

namespace pvmppt {

inline constexpr double kBoltzmann = 1.380649e-23;          // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kKelvinOffset = 273.15;
inline constexpr double kStcIrradiance = 1000.0;  // W/m^2
inline constexpr double kStcTempC = 25.0;

/// Datasheet values at standard test conditions. Defaults describe a
/// 60-cell, 213 W module.
struct PvDatasheet {
  double v_oc_stc = 36.3;
  double i_sc_stc = 7.84;
  double v_mp_stc = 29.0;
  double i_mp_stc = 7.35;
  double p_rated = 213.0;
  double alpha_isc = 0.0005;   // 1/degC
  double beta_voc = -0.0035;   // 1/degC
  int n_cells_series = 60;
};

/// Extracted single-diode parameters plus the temperature-scaling basis.
struct DiodeParams {
  double i_ph_stc = 0.0;
  double i_0_stc = 0.0;
  double n_ideality = 0.0;
  double r_s = 0.0;
  double r_sh = 0.0;
  int n_cells_series = 1;
  double alpha_isc = 0.0;
  double bandgap_ev = 1.12;
  double i_sc_stc = 0.0;
  double t_ref_c = kStcTempC;
};

struct EnvSample {
  double irradiance_g = kStcIrradiance;  // W/m^2
  double cell_temp_c = kStcTempC;
  double t = 0.0;  // s since simulation start
};

inline constexpr EnvSample stc() { return EnvSample{kStcIrradiance, kStcTempC, 0.0}; }

struct OperatingPoint {
  double v = 0.0;
  double i = 0.0;
  double p = 0.0;

  static constexpr OperatingPoint at(double v, double i) { return {v, i, v * i}; }
};

inline void validate(const PvDatasheet& ds) {
  using detail::require;
  constexpr auto code = ErrorCode::InvalidDatasheet;
  require(std::isfinite(ds.v_oc_stc) && ds.v_oc_stc > 0.0, code, "pv.v_oc", "must be positive");
  require(std::isfinite(ds.i_sc_stc) && ds.i_sc_stc > 0.0, code, "pv.i_sc", "must be positive");
  require(std::isfinite(ds.v_mp_stc) && ds.v_mp_stc > 0.0 && ds.v_mp_stc < ds.v_oc_stc, code,
          "pv.v_mp", "must satisfy 0 < v_mp < v_oc");
  require(std::isfinite(ds.i_mp_stc) && ds.i_mp_stc > 0.0 && ds.i_mp_stc < ds.i_sc_stc, code,
          "pv.i_mp", "must satisfy 0 < i_mp < i_sc");
  require(std::isfinite(ds.p_rated) && ds.p_rated > 0.0 &&
              std::abs(ds.p_rated - ds.v_mp_stc * ds.i_mp_stc) <= 0.02 * ds.p_rated,
          code, "pv.p_rated", "must be within 2% of v_mp * i_mp");
  require(std::isfinite(ds.alpha_isc) && ds.alpha_isc >= 0.0, code, "pv.alpha_isc",
          "must be non-negative");
  require(std::isfinite(ds.beta_voc) && ds.beta_voc < 0.0, code, "pv.beta_voc",
          "must be negative");
  require(ds.n_cells_series >= 1, code, "pv.n_cells", "must be at least 1");
}

inline void validate(const EnvSample& env) {
  using detail::require;
  require(std::isfinite(env.irradiance_g) && env.irradiance_g >= 0.0, ErrorCode::InvalidProfile,
          "env.irradiance_g", "must be non-negative");
  require(std::isfinite(env.cell_temp_c) && env.cell_temp_c >= -40.0 && env.cell_temp_c <= 120.0,
          ErrorCode::InvalidProfile, "env.cell_temp_c", "must lie in [-40, 120] degC");
}

/// Modified ideality factor a = n * Ns * k * T / q, in volts.
inline double diode_voltage_scale(const DiodeParams& params, double cell_temp_c) {
  const double t_kelvin = cell_temp_c + kKelvinOffset;
  return params.n_ideality * params.n_cells_series * kBoltzmann * t_kelvin / kElementaryCharge;
}

inline double photocurrent(const DiodeParams& params, const EnvSample& env) {
  return params.i_ph_stc * (env.irradiance_g / kStcIrradiance) *
         (1.0 + params.alpha_isc * (env.cell_temp_c - params.t_ref_c));
}

inline double saturation_current(const DiodeParams& params, double cell_temp_c) {
  const double t_ref = params.t_ref_c + kKelvinOffset;
  const double t = cell_temp_c + kKelvinOffset;
  const double thermal_n = params.n_ideality * kBoltzmann / kElementaryCharge;
  return params.i_0_stc * std::pow(t / t_ref, 3.0) *
         std::exp(params.bandgap_ev / thermal_n * (1.0 / t_ref - 1.0 / t));
}

namespace detail {

/// Single-diode equation with all temperature/irradiance dependence resolved.
struct DiodeEquation {
  double i_ph;
  double i_0;
  double a;
  double r_s;
  double r_sh;

  static DiodeEquation at(const DiodeParams& params, const EnvSample& env) {
    return {photocurrent(params, env), saturation_current(params, env.cell_temp_c),
            diode_voltage_scale(params, env.cell_temp_c), params.r_s, params.r_sh};
  }

  // f(I) = 0 at the terminal current. Strictly decreasing and concave in I.
  double residual(double v, double i) const {
    const double vd = v + i * r_s;
    return i_ph - i_0 * std::expm1(vd / a) - vd / r_sh - i;
  }

  double residual_slope(double v, double i) const {
    return -i_0 * r_s / a * std::exp((v + i * r_s) / a) - r_s / r_sh - 1.0;
  }

  // Diode + shunt conductance seen at the junction.
  double junction_conductance(double v, double i) const {
    return i_0 / a * std::exp((v + i * r_s) / a) + 1.0 / r_sh;
  }
};

inline constexpr double kCurrentTolerance = 1e-9;
inline constexpr int kMaxNewtonIterations = 100;

inline double solve_current(const DiodeEquation& eq, double v, double i_sc_ref) {
  // Start at the photocurrent: f(Iph) < 0 for v >= 0, and Newton on a concave
  // decreasing function started right of the root converges monotonically.
  double i = eq.i_ph;
  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    const double f = eq.residual(v, i);
    const double df = eq.residual_slope(v, i);
    if (!std::isfinite(f) || !std::isfinite(df)) break;
    const double step = f / df;
    i -= step;
    if (std::abs(step) <= kCurrentTolerance) return i;
  }

  double lo = -0.1 * i_sc_ref;
  double hi = 1.1 * eq.i_ph;
  double f_lo = eq.residual(v, lo);
  double f_hi = eq.residual(v, hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    throw Error(ErrorCode::NonConvergence, "terminal current root is not bracketed");
  }
  while (hi - lo > kCurrentTolerance * 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eq.residual(v, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Terminal current at voltage `v` (>= 0) for the given conditions.
inline double pv_current(const DiodeParams& params, const EnvSample& env, double v) {
  detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidSpec, "v", "must be >= 0");
  validate(env);
  return detail::solve_current(detail::DiodeEquation::at(params, env), v, params.i_sc_stc);
}

/// dI/dV by implicit differentiation of the diode equation.
inline double pv_current_slope(const DiodeParams& params, const EnvSample& env, double v) {
  const auto eq = detail::DiodeEquation::at(params, env);
  const double i = pv_current(params, env, v);
  const double g = eq.junction_conductance(v, i);
  return -g / (1.0 + g * eq.r_s);
}

/// Open-circuit voltage for the given conditions; 0 when there is no
/// photocurrent.
inline double open_circuit_voltage(const DiodeParams& params, const EnvSample& env) {
  validate(env);
  const auto eq = detail::DiodeEquation::at(params, env);
  if (!(eq.i_ph > 0.0) || detail::solve_current(eq, 0.0, params.i_sc_stc) <= 0.0) return 0.0;

  // Ideal-diode estimate ignores the shunt path, so it over-estimates Voc.
  double lo = 0.0;
  double hi = eq.a * std::log1p(eq.i_ph / eq.i_0);
  while (detail::solve_current(eq, hi, params.i_sc_stc) > 0.0) hi *= 1.5;

  // Safeguarded Newton on I(V) = 0.
  double v = hi;
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double i = detail::solve_current(eq, v, params.i_sc_stc);
    if (i == 0.0) return v;
    if (i > 0.0) {
      lo = v;
    } else {
      hi = v;
    }
    const double g = eq.junction_conductance(v, i);
    const double slope = -g / (1.0 + g * eq.r_s);
    double next = v - i / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - v) < 1e-13) return next;
    v = next;
  }
  return v;
}

/// Uniformly spaced points on [0, v_oc(env)].
inline std::vector<OperatingPoint> iv_curve(const DiodeParams& params, const EnvSample& env,
                                            std::size_t n_points) {
  detail::require(n_points >= 2, ErrorCode::InvalidSpec, "points", "need at least 2 points");
  const double v_oc = open_circuit_voltage(params, env);
  std::vector<OperatingPoint> curve;
  curve.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double v = (k + 1 == n_points)
                         ? v_oc
                         : v_oc * static_cast<double>(k) / static_cast<double>(n_points - 1);
    curve.push_back(OperatingPoint::at(v, pv_current(params, env, v)));
  }
  return curve;
}

/// True maximum power point by golden-section search over [0, v_oc(env)].
/// Reference for all tracking-efficiency figures.
inline OperatingPoint mpp_oracle(const DiodeParams& params, const EnvSample& env,
                                 double v_tolerance = 1e-4) {
  const double v_oc = open_circuit_voltage(params, env);
  if (v_oc <= 0.0) return OperatingPoint::at(0.0, pv_current(params, env, 0.0));

  const auto eq = detail::DiodeEquation::at(params, env);
  auto power = [&](double v) { return v * detail::solve_current(eq, v, params.i_sc_stc); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0;
  double b = v_oc;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double pc = power(c);
  double pd = power(d);
  while (b - a > v_tolerance) {
    if (pc > pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - inv_phi * (b - a);
      pc = power(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + inv_phi * (b - a);
      pd = power(d);
    }
  }
  const double v = pc > pd ? c : d;
  return OperatingPoint::at(v, detail::solve_current(eq, v, params.i_sc_stc));
}

namespace detail {

// 3x3 linear solve by Gaussian elimination with partial pivoting.
inline std::optional<std::array<double, 3>> solve3(std::array<std::array<double, 3>, 3> m,
                                                   std::array<double, 3> rhs) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
    }
    if (std::abs(m[pivot][col]) < 1e-300) return std::nullopt;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int row = col + 1; row < 3; ++row) {
      const double f = m[row][col] / m[col][col];
      for (int k = col; k < 3; ++k) m[row][k] -= f * m[col][k];
      rhs[row] -= f * rhs[col];
    }
  }
  std::array<double, 3> x{};
  for (int row = 2; row >= 0; --row) {
    double s = rhs[row];
    for (int k = row + 1; k < 3; ++k) s -= m[row][k] * x[k];
    x[row] = s / m[row][row];
  }
  return x;
}

// Unknowns: (ln i_0, n, r_s). Shunt resistance is held fixed and the
// photocurrent is tied to i_sc so that I(0) = i_sc holds identically.
// Residuals (all in amps): I(v_oc) = 0, I(v_mp) = i_mp, dP/dV(v_mp) = 0.
struct ExtractionProblem {
  const PvDatasheet& ds;
  double r_sh;

  double scale(double n) const {
    return n * ds.n_cells_series * kBoltzmann * (kStcTempC + kKelvinOffset) / kElementaryCharge;
  }

  double photocurrent_for(double i_0, double a, double r_s) const {
    return ds.i_sc_stc + i_0 * std::expm1(ds.i_sc_stc * r_s / a) + ds.i_sc_stc * r_s / r_sh;
  }

  std::array<double, 3> residuals(const std::array<double, 3>& x) const {
    const double i_0 = std::exp(x[0]);
    const double n = x[1];
    const double r_s = x[2];
    const double a = scale(n);
    const DiodeEquation eq{photocurrent_for(i_0, a, r_s), i_0, a, r_s, r_sh};
    const double g = eq.junction_conductance(ds.v_mp_stc, ds.i_mp_stc);
    const double slope = -g / (1.0 + g * r_s);
    return {eq.residual(ds.v_oc_stc, 0.0), eq.residual(ds.v_mp_stc, ds.i_mp_stc),
            ds.i_mp_stc + ds.v_mp_stc * slope};
  }

  static double norm(const std::array<double, 3>& r) {
    return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  }

  static bool admissible(const std::array<double, 3>& x) {
    return std::isfinite(x[0]) && x[1] > 0.2 && x[1] < 10.0 && x[2] >= 0.0;
  }

  std::optional<std::array<double, 3>> solve(int max_iterations, double tolerance) const {
    const double n0 = 1.3;
    const double i_00 = ds.i_sc_stc / std::expm1(ds.v_oc_stc / scale(n0));
    std::array<double, 3> x{std::log(i_00), n0, 0.1 * (ds.v_oc_stc - ds.v_mp_stc) / ds.i_mp_stc};
    auto r = residuals(x);

    for (int iter = 0; iter < max_iterations; ++iter) {
      double worst = 0.0;
      for (double v : r) worst = std::max(worst, std::abs(v));
      if (worst <= tolerance) return x;

      std::array<std::array<double, 3>, 3> jac{};
      for (int j = 0; j < 3; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
        auto xp = x;
        auto xm = x;
        xp[j] += h;
        xm[j] -= h;
        const auto rp = residuals(xp);
        const auto rm = residuals(xm);
        for (int i = 0; i < 3; ++i) jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
      }
      const auto dx = solve3(jac, {-r[0], -r[1], -r[2]});
      if (!dx) return std::nullopt;

      const double r_norm = norm(r);
      double lambda = 1.0;
      bool accepted = false;
      while (lambda > 1e-6) {
        std::array<double, 3> trial{x[0] + lambda * (*dx)[0], x[1] + lambda * (*dx)[1],
                                    x[2] + lambda * (*dx)[2]};
        if (admissible(trial)) {
          const auto rt = residuals(trial);
          if (std::isfinite(norm(rt)) && norm(rt) < r_norm) {
            x = trial;
            r = rt;
            accepted = true;
            break;
          }
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
    }
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    if (worst <= 1e-6) return x;
    return std::nullopt;
  }
};

}  // namespace detail

/// Extracts single-diode parameters from datasheet values.
///
/// The shunt resistance comes from the slope heuristic
/// r_sh = k * (v_mp / (i_sc - i_mp) - (v_oc - v_mp) / i_mp) with k = 10,
/// retried with larger k if the remaining system has no physical solution.
/// A damped Newton iteration then solves for (i_0, n, r_s).
inline DiodeParams extract_params(const PvDatasheet& ds) {
  validate(ds);
  const double r_sh_floor =
      ds.v_mp_stc / (ds.i_sc_stc - ds.i_mp_stc) - (ds.v_oc_stc - ds.v_mp_stc) / ds.i_mp_stc;
  const double base = r_sh_floor > 0.0 ? r_sh_floor : ds.v_mp_stc / (ds.i_sc_stc - ds.i_mp_stc);

  for (double factor : {10.0, 20.0, 40.0, 80.0}) {
    const detail::ExtractionProblem problem{ds, factor * base};
    const auto x = problem.solve(200, 1e-12);
    if (!x) continue;

    DiodeParams p;
    p.i_0_stc = std::exp((*x)[0]);
    p.n_ideality = (*x)[1];
    p.r_s = (*x)[2];
    p.r_sh = problem.r_sh;
    const double a = problem.scale(p.n_ideality);
    p.i_ph_stc = problem.photocurrent_for(p.i_0_stc, a, p.r_s);
    p.n_cells_series = ds.n_cells_series;
    p.alpha_isc = ds.alpha_isc;
    p.i_sc_stc = ds.i_sc_stc;
    p.t_ref_c = kStcTempC;

    // Ideal-diode approximation of dVoc/dT with cubic/bandgap I0 scaling,
    // solved for the bandgap that reproduces beta_voc.
    const double t_ref = kStcTempC + kKelvinOffset;
    p.bandgap_ev = (ds.v_oc_stc * (1.0 - ds.beta_voc * t_ref) + a * ds.alpha_isc * t_ref - 3.0 * a) /
                   ds.n_cells_series;

    if (!(p.i_0_stc > 0.0 && p.n_ideality > 0.0 && p.r_s > 0.0 && p.r_sh > p.r_s &&
          p.i_ph_stc > 0.0 && p.bandgap_ev > 0.0)) {
      continue;
    }

    const auto env = stc();
    const bool constraints_hold =
        std::abs(pv_current(p, env, 0.0) - ds.i_sc_stc) <= 1e-6 &&
        std::abs(pv_current(p, env, ds.v_oc_stc)) <= 1e-6 &&
        std::abs(pv_current(p, env, ds.v_mp_stc) - ds.i_mp_stc) <= 1e-6;
    if (constraints_hold) return p;
  }
  throw Error(ErrorCode::NonConvergence,
              "parameter extraction residual above 1e-6 A after 200 iterations; datasheet values "
              "are inconsistent with a single-diode model");
}

}  // namespace pvmppt

#endif  // PVMPPT_PV_MODEL_HPP
