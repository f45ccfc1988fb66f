#ifndef PVMPPT_DECOUPLING_HPP
#define PVMPPT_DECOUPLING_HPP

// Decoupling-capacitor sizing for single-phase micro-inverters.
//
// The capacitor buffers the double-line-frequency power ripple:
//
//   C = P_pv / (w0 * V_dc * dV),   w0 = 2 * pi * f0
//
// The 2*pi factor matters: 200 W, 50 Hz, 35 V, 2 V ripple gives 9.09 mF.
// Placement only changes (V_dc, dV). A DC link runs at a higher voltage and
// tolerates more ripple, so the same power needs far less capacitance. AC-side
// decoupling has no closed-form sizing rule of its own; it is evaluated with
// the same expression at whatever ripple parameters the caller supplies, and
// in practice needs an extra phase leg plus its control.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pvmppt/error.hpp"

namespace pvmppt {

enum class DecouplingLocation { PvSide, DcLink, AcSide };

inline std::string_view to_string(DecouplingLocation loc) {
  switch (loc) {
    case DecouplingLocation::PvSide: return "PvSide";
    case DecouplingLocation::DcLink: return "DcLink";
    case DecouplingLocation::AcSide: return "AcSide";
  }
  return "PvSide";
}

inline std::optional<DecouplingLocation> parse_location(std::string_view name) {
  std::string lower;
  for (char c : name) {
    if (c != '_' && c != '-') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "pvside" || lower == "pv") return DecouplingLocation::PvSide;
  if (lower == "dclink" || lower == "dc") return DecouplingLocation::DcLink;
  if (lower == "acside" || lower == "ac") return DecouplingLocation::AcSide;
  return std::nullopt;
}

struct DecouplingSpec {
  double p_pv = 200.0;    // W
  double f0 = 50.0;       // Hz
  double v_dc = 35.0;     // V at the capacitor
  double delta_v = 2.0;   // V permitted ripple
  DecouplingLocation location = DecouplingLocation::PvSide;
};

struct LocationRow {
  DecouplingLocation location;
  double capacitance;     // F
  double ratio_to_pv_side;
};

inline void validate(const DecouplingSpec& s) {
  using detail::require;
  constexpr auto code = ErrorCode::InvalidSpec;
  require(std::isfinite(s.p_pv) && s.p_pv > 0.0, code, "power", "must be positive");
  require(std::isfinite(s.f0) && s.f0 > 0.0, code, "freq", "must be positive");
  require(std::isfinite(s.v_dc) && s.v_dc > 0.0, code, "vdc", "must be positive");
  require(std::isfinite(s.delta_v) && s.delta_v > 0.0, code, "ripple", "must be positive");
  require(s.delta_v < s.v_dc, code, "ripple", "must be below the capacitor voltage");
}

inline double required_capacitance(const DecouplingSpec& spec) {
  validate(spec);
  const double omega0 = 2.0 * std::numbers::pi * spec.f0;
  return spec.p_pv / (omega0 * spec.v_dc * spec.delta_v);
}

/// Evaluates every placement and expresses it relative to the PV-side
/// capacitance. Rows come back sorted by capacitance, largest first, so the
/// table does not depend on input order.
inline std::vector<LocationRow> compare_locations(const std::vector<DecouplingSpec>& specs) {
  const auto baseline = std::find_if(specs.begin(), specs.end(), [](const DecouplingSpec& s) {
    return s.location == DecouplingLocation::PvSide;
  });
  if (baseline == specs.end()) {
    throw Error(ErrorCode::MissingBaseline, "no PvSide entry to compare against", "location");
  }
  if (std::count_if(specs.begin(), specs.end(), [](const DecouplingSpec& s) {
        return s.location == DecouplingLocation::PvSide;
      }) != 1) {
    throw Error(ErrorCode::InvalidSpec, "exactly one PvSide entry is required", "location");
  }
  const double c_pv = required_capacitance(*baseline);

  std::vector<LocationRow> rows;
  rows.reserve(specs.size());
  for (const auto& s : specs) {
    const double c = required_capacitance(s);
    rows.push_back({s.location, c, c / c_pv});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const LocationRow& a, const LocationRow& b) {
    if (a.capacitance != b.capacitance) return a.capacitance > b.capacitance;
    return static_cast<int>(a.location) < static_cast<int>(b.location);
  });
  return rows;
}

/// Three significant figures in F, mF, uF or nF, e.g. "9.09 mF".
inline std::string format_capacitance(double farads) {
  struct Unit {
    double scale;
    const char* name;
  };
  static constexpr Unit units[] = {{1.0, "F"}, {1e-3, "mF"}, {1e-6, "uF"}, {1e-9, "nF"}};
  const Unit* unit = &units[3];
  for (const auto& u : units) {
    if (std::abs(farads) >= u.scale) {
      unit = &u;
      break;
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g %s", farads / unit->scale, unit->name);
  return buf;
}

}  // namespace pvmppt

#endif  // PVMPPT_DECOUPLING_HPP
