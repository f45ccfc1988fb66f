#ifndef PVMPPT_CONFIG_HPP
#define PVMPPT_CONFIG_HPP

// Line-oriented `key = value` configuration. Blank lines and `#` comments are
// ignored. Keys are dotted (`pv.v_oc`, `mppt.step_d`, ...); anything not in
// the table below is rejected. `profile.cloud` may repeat.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pvmppt/decoupling.hpp"
#include "pvmppt/error.hpp"
#include "pvmppt/sim_engine.hpp"

namespace pvmppt {

struct RunConfig {
  SimConfig sim;
  std::vector<DecouplingSpec> decoupling = default_decoupling_specs();
  std::string out_dir = "out";

  static std::vector<DecouplingSpec> default_decoupling_specs() {
    return {
        {200.0, 50.0, 35.0, 2.0, DecouplingLocation::PvSide},
        {200.0, 50.0, 350.0, 14.0, DecouplingLocation::DcLink},
        {200.0, 50.0, 325.0, 50.0, DecouplingLocation::AcSide},
    };
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidConfig, key + ": not a number: '" + text + "'", key);
  }
  return value;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text,
                                      std::size_t expected) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
  if (out.size() != expected) {
    throw Error(ErrorCode::InvalidConfig,
                key + ": expected " + std::to_string(expected) + " comma-separated values", key);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

inline Setter capacitor_entry(DecouplingLocation loc) {
  return [loc](RunConfig& c, const std::string& key, const std::string& v) {
    const auto vals = parse_list(key, v, 4);
    std::erase_if(c.decoupling, [loc](const DecouplingSpec& s) { return s.location == loc; });
    c.decoupling.push_back({vals[0], vals[1], vals[2], vals[3], loc});
  };
}

inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto num = [&t](std::string key, auto getter) {
      t.emplace(std::move(key), [getter](RunConfig& c, const std::string& k, const std::string& v) {
        getter(c) = parse_number(k, v);
      });
    };
    num("pv.v_oc", [](RunConfig& c) -> double& { return c.sim.pv.v_oc_stc; });
    num("pv.i_sc", [](RunConfig& c) -> double& { return c.sim.pv.i_sc_stc; });
    num("pv.v_mp", [](RunConfig& c) -> double& { return c.sim.pv.v_mp_stc; });
    num("pv.i_mp", [](RunConfig& c) -> double& { return c.sim.pv.i_mp_stc; });
    num("pv.p_rated", [](RunConfig& c) -> double& { return c.sim.pv.p_rated; });
    num("pv.alpha_isc", [](RunConfig& c) -> double& { return c.sim.pv.alpha_isc; });
    num("pv.beta_voc", [](RunConfig& c) -> double& { return c.sim.pv.beta_voc; });
    t.emplace("pv.n_cells", [](RunConfig& c, const std::string& k, const std::string& v) {
      const double n = parse_number(k, v);
      if (n != std::floor(n) || n < 1.0 || n > 10000.0) {
        throw Error(ErrorCode::InvalidConfig, k + ": must be a positive integer", k);
      }
      c.sim.pv.n_cells_series = static_cast<int>(n);
    });

    t.emplace("mppt.variant", [](RunConfig& c, const std::string& k, const std::string& v) {
      const auto parsed = parse_variant(v);
      if (!parsed) {
        throw Error(ErrorCode::InvalidConfig,
                    k + ": unknown variant '" + v + "' (PoFixed, PoModulated, IncCond)", k);
      }
      c.sim.mppt.variant = *parsed;
    });
    num("mppt.step_d", [](RunConfig& c) -> double& { return c.sim.mppt.step_d; });
    num("mppt.step_d_min", [](RunConfig& c) -> double& { return c.sim.mppt.step_d_min; });
    num("mppt.step_d_max", [](RunConfig& c) -> double& { return c.sim.mppt.step_d_max; });
    num("mppt.gain_k", [](RunConfig& c) -> double& { return c.sim.mppt.modulation_gain_k; });
    num("mppt.epsilon_p", [](RunConfig& c) -> double& { return c.sim.mppt.epsilon_p; });
    num("mppt.epsilon_i", [](RunConfig& c) -> double& { return c.sim.mppt.epsilon_i; });
    num("mppt.sample_period", [](RunConfig& c) -> double& { return c.sim.mppt.sample_period; });
    num("mppt.d_init", [](RunConfig& c) -> double& { return c.sim.mppt.d_init; });

    num("stage.v_link", [](RunConfig& c) -> double& { return c.sim.stage.v_link; });
    num("stage.d_min", [](RunConfig& c) -> double& { return c.sim.stage.d_min; });
    num("stage.d_max", [](RunConfig& c) -> double& { return c.sim.stage.d_max; });
    num("stage.r_on", [](RunConfig& c) -> double& { return c.sim.stage.r_on; });
    num("stage.r_l", [](RunConfig& c) -> double& { return c.sim.stage.r_l; });
    num("stage.v_diode", [](RunConfig& c) -> double& { return c.sim.stage.v_diode; });
    num("stage.e_sw", [](RunConfig& c) -> double& { return c.sim.stage.e_sw; });
    num("stage.f_sw", [](RunConfig& c) -> double& { return c.sim.stage.f_sw; });

    num("inv.f_out", [](RunConfig& c) -> double& { return c.sim.inverter.f_out; });
    num("inv.v_drop", [](RunConfig& c) -> double& { return c.sim.inverter.v_drop; });
    num("inv.m_index", [](RunConfig& c) -> double& { return c.sim.inverter.modulation_index; });

    num("profile.duration_s", [](RunConfig& c) -> double& { return c.sim.profile.duration_s; });
    num("profile.dt_s", [](RunConfig& c) -> double& { return c.sim.profile.dt_s; });
    num("profile.sunrise_s", [](RunConfig& c) -> double& { return c.sim.profile.sunrise_s; });
    num("profile.sunset_s", [](RunConfig& c) -> double& { return c.sim.profile.sunset_s; });
    num("profile.g_peak", [](RunConfig& c) -> double& { return c.sim.profile.g_peak; });
    num("profile.t_ambient_c", [](RunConfig& c) -> double& { return c.sim.profile.t_ambient_c; });
    num("profile.temp_coupling", [](RunConfig& c) -> double& { return c.sim.profile.temp_coupling; });
    num("profile.hold_s", [](RunConfig& c) -> double& { return c.sim.profile.hold_s; });
    t.emplace("profile.cloud", [](RunConfig& c, const std::string& k, const std::string& v) {
      const auto vals = parse_list(k, v, 3);
      c.sim.profile.cloud_events.push_back({vals[0], vals[1], vals[2]});
    });

    t.emplace("cap.pv_side", capacitor_entry(DecouplingLocation::PvSide));
    t.emplace("cap.dc_link", capacitor_entry(DecouplingLocation::DcLink));
    t.emplace("cap.ac_side", capacitor_entry(DecouplingLocation::AcSide));

    t.emplace("out.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; });
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::setters()) keys.push_back(k);
  return keys;
}

/// Checks every sub-configuration; errors name the offending config key.
inline void validate(const RunConfig& cfg) {
  validate(cfg.sim);
  for (const auto& s : cfg.decoupling) {
    try {
      validate(s);
    } catch (const Error& e) {
      const std::string key = "cap." + std::string(s.location == DecouplingLocation::PvSide   ? "pv_side"
                                                   : s.location == DecouplingLocation::DcLink ? "dc_link"
                                                                                              : "ac_side");
      throw Error(ErrorCode::InvalidConfig, key + ": " + e.what(), key);
    }
  }
}

/// Parses configuration text on top of the defaults and validates the result.
inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  "line " + std::to_string(line_no) + ": expected 'key = value'", "");
    }
    const std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
    const std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));
    const auto& table = detail::setters();
    const auto it = table.find(key);
    if (it == table.end()) throw Error(ErrorCode::InvalidConfig, key + ": unknown key", key);
    if (key != "profile.cloud" && !seen.insert(key).second) {
      throw Error(ErrorCode::InvalidConfig, key + ": duplicate key", key);
    }
    it->second(cfg, key, value);
  }
  cfg.sim = with_stage_clamps(cfg.sim);
  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file '" + path + "'", "config");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace pvmppt

#endif  // PVMPPT_CONFIG_HPP
