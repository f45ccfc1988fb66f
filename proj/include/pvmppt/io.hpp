#ifndef PVMPPT_IO_HPP
#define PVMPPT_IO_HPP

// CSV emission and atomic file output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvmppt/error.hpp"
#include "pvmppt/mppt.hpp"
#include "pvmppt/sim_engine.hpp"

namespace pvmppt {

inline constexpr const char* kSeriesHeader = "t_s,g_wm2,temp_c,v_pv,i_pv,p_pv,duty,p_mpp,p_out";
inline constexpr const char* kSummaryHeader = "variant,rms_power_w,mppt_eff,conv_eff,ripple_w";
inline constexpr const char* kIvHeader = "v,i,p";
inline constexpr const char* kUndefinedField = "NA";

/// Fixed-point with `decimals` digits; negative zero prints as zero.
inline std::string fixed(double value, int decimals = 6) {
  if (value == 0.0) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

inline std::string fixed_or_na(const std::optional<double>& value, int decimals = 6) {
  return value ? fixed(*value, decimals) : std::string(kUndefinedField);
}

inline void write_series_csv(std::ostream& out, std::span<const SimRow> rows) {
  out << kSeriesHeader << '\n';
  for (const auto& r : rows) {
    out << fixed(r.t, 3) << ',' << fixed(r.env.irradiance_g, 4) << ',' << fixed(r.env.cell_temp_c, 4)
        << ',' << fixed(r.pv.v) << ',' << fixed(r.pv.i) << ',' << fixed(r.pv.p) << ','
        << fixed(r.duty) << ',' << fixed(r.p_mpp) << ',' << fixed(r.p_out) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out,
                              std::span<const std::pair<MpptVariant, Metrics>> rows) {
  out << kSummaryHeader << '\n';
  for (const auto& [variant, m] : rows) {
    out << to_string(variant) << ',' << fixed(m.rms_power_w) << ',' << fixed_or_na(m.mppt_efficiency)
        << ',' << fixed_or_na(m.converter_efficiency) << ',' << fixed_or_na(m.steady_ripple_w) << '\n';
  }
}

inline void write_iv_csv(std::ostream& out, std::span<const OperatingPoint> curve) {
  out << kIvHeader << '\n';
  for (const auto& op : curve) out << fixed(op.v) << ',' << fixed(op.i, 9) << ',' << fixed(op.p) << '\n';
}

/// Writes to `<path>.tmp` and renames over `path`, so readers never see a
/// partially written file.
template <class Writer>
void write_atomically(const std::filesystem::path& path, Writer&& writer) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::SimulationFailure, "cannot open '" + tmp.string() + "' for writing");
    std::forward<Writer>(writer)(out);
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error(ErrorCode::SimulationFailure, "write to '" + tmp.string() + "' failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace pvmppt

#endif  // PVMPPT_IO_HPP
