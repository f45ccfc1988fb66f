#ifndef PVMPPT_CLI_HPP
#define PVMPPT_CLI_HPP

// Command implementations behind the `pvmppt` executable. Each returns the
// process exit code: 0 success, 2 usage/config error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pvmppt/config.hpp"
#include "pvmppt/decoupling.hpp"
#include "pvmppt/error.hpp"
#include "pvmppt/io.hpp"
#include "pvmppt/power_stage.hpp"
#include "pvmppt/pv_model.hpp"
#include "pvmppt/sim_engine.hpp"

namespace pvmppt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
};

namespace detail {

struct Loaded {
  RunConfig cfg;
  std::filesystem::path out_dir;
};

inline std::optional<Loaded> load(const GlobalOptions& g, std::ostream& err) {
  try {
    Loaded l{g.config_path ? load_config(*g.config_path) : parse_config(""), {}};
    l.out_dir = g.out_dir ? *g.out_dir : l.cfg.out_dir;
    return l;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return std::nullopt;
  }
}

inline bool prepare_out_dir(const std::filesystem::path& dir, std::ostream& err) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    err << "config error: output directory '" << dir.string() << "' is not writable\n";
    return false;
  }
  return true;
}

}  // namespace detail

/// Runs one variant, or all three when `variant` is "all"; writes
/// `<out>/<Variant>_series.csv` per run plus `<out>/summary.csv`.
inline int cmd_simulate(const GlobalOptions& g, const std::optional<std::string>& variant,
                        std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(g, err);
  if (!loaded) return kExitUsage;

  std::vector<MpptVariant> variants;
  if (!variant) {
    variants.push_back(loaded->cfg.sim.mppt.variant);
  } else if (*variant == "all") {
    variants = {MpptVariant::PoFixed, MpptVariant::PoModulated, MpptVariant::IncCond};
  } else if (const auto v = parse_variant(*variant)) {
    variants.push_back(*v);
  } else {
    err << "usage error: --variant must be PoFixed, PoModulated, IncCond or all\n";
    return kExitUsage;
  }
  if (!detail::prepare_out_dir(loaded->out_dir, err)) return kExitUsage;

  try {
    const auto results = run_variants(loaded->cfg.sim, variants);
    std::vector<std::pair<MpptVariant, Metrics>> summary;
    for (std::size_t k = 0; k < variants.size(); ++k) {
      const auto path = loaded->out_dir / (std::string(to_string(variants[k])) + "_series.csv");
      write_atomically(path, [&](std::ostream& os) { write_series_csv(os, results[k].series); });
      summary.emplace_back(variants[k], results[k].metrics);
      out << "wrote " << path.string() << '\n';
    }
    const auto summary_path = loaded->out_dir / "summary.csv";
    write_atomically(summary_path, [&](std::ostream& os) { write_summary_csv(os, summary); });
    out << "wrote " << summary_path.string() << '\n';
    for (const auto& [v, m] : summary) {
      out << to_string(v) << ": rms_power_w=" << fixed(m.rms_power_w, 3)
          << " mppt_eff=" << fixed_or_na(m.mppt_efficiency, 4)
          << " conv_eff=" << fixed_or_na(m.converter_efficiency, 4)
          << " ripple_w=" << fixed_or_na(m.steady_ripple_w, 4) << '\n';
    }
  } catch (const Error& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct SizeCapOptions {
  std::optional<double> power;
  std::optional<double> freq;
  std::optional<double> vdc;
  std::optional<double> ripple;
  std::string location = "pv_side";
};

inline int cmd_size_cap(const SizeCapOptions& o, std::ostream& out, std::ostream& err) {
  if (!o.power || !o.freq || !o.vdc || !o.ripple) {
    err << "usage error: --power, --freq, --vdc and --ripple are all required\n";
    return kExitUsage;
  }
  const auto loc = parse_location(o.location);
  if (!loc) {
    err << "usage error: --location must be pv_side, dc_link or ac_side\n";
    return kExitUsage;
  }
  try {
    const double c = required_capacitance({*o.power, *o.freq, *o.vdc, *o.ripple, *loc});
    char farads[64];
    std::snprintf(farads, sizeof farads, "%.6e", c);
    out << "location: " << to_string(*loc) << '\n'
        << "capacitance_f: " << farads << '\n'
        << "capacitance: " << format_capacitance(c) << '\n';
  } catch (const Error& e) {
    err << "usage error: --" << e.field() << ": " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

struct IvCurveOptions {
  double g = kStcIrradiance;
  double t = kStcTempC;
  std::size_t points = 200;
};

/// Writes `<out>/iv_curve.csv` for one set of conditions.
inline int cmd_iv_curve(const GlobalOptions& g, const IvCurveOptions& o, std::ostream& out,
                        std::ostream& err) {
  auto loaded = detail::load(g, err);
  if (!loaded) return kExitUsage;
  const EnvSample env{o.g, o.t, 0.0};
  try {
    validate(env);
    if (o.points < 2) throw Error(ErrorCode::InvalidSpec, "points: need at least 2", "points");
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!detail::prepare_out_dir(loaded->out_dir, err)) return kExitUsage;
  try {
    const auto params = extract_params(loaded->cfg.sim.pv);
    const auto curve = iv_curve(params, env, o.points);
    const auto path = loaded->out_dir / "iv_curve.csv";
    write_atomically(path, [&](std::ostream& os) { write_iv_csv(os, curve); });
    const auto mpp = mpp_oracle(params, env);
    out << "wrote " << path.string() << '\n'
        << "mpp: v=" << fixed(mpp.v, 4) << " i=" << fixed(mpp.i, 4) << " p=" << fixed(mpp.p, 4) << '\n';
  } catch (const Error& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

/// Prints the decoupling capacitance for every placement in the config's
/// `cap.*` block, relative to the PV-side baseline.
inline int cmd_compare(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(g, err);
  if (!loaded) return kExitUsage;
  try {
    const auto rows = compare_locations(loaded->cfg.decoupling);
    out << "location,capacitance_f,capacitance,ratio_to_pv_side\n";
    for (const auto& r : rows) {
      char farads[64];
      std::snprintf(farads, sizeof farads, "%.6e", r.capacitance);
      char ratio[64];
      std::snprintf(ratio, sizeof ratio, "%.6g", r.ratio_to_pv_side);
      out << to_string(r.location) << ',' << farads << ',' << format_capacitance(r.capacitance) << ','
          << ratio << '\n';
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

/// Prints the averaged inverter output for the configured link voltage.
inline int cmd_inverter(const GlobalOptions& g, std::optional<double> v_link, std::ostream& out,
                        std::ostream& err) {
  auto loaded = detail::load(g, err);
  if (!loaded) return kExitUsage;
  try {
    const auto ac = inverter_output(v_link.value_or(loaded->cfg.sim.stage.v_link), loaded->cfg.sim.inverter);
    out << "v_pk: " << fixed(ac.v_pk, 4) << '\n'
        << "v_rms: " << fixed(ac.v_rms, 4) << '\n'
        << "v_pk_pk: " << fixed(ac.v_pk_pk, 4) << '\n'
        << "f_out: " << fixed(ac.f_out, 2) << '\n';
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace pvmppt::cli

#endif  // PVMPPT_CLI_HPP
