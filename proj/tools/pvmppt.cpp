// pvmppt: command-line front end for the MPPT simulation toolkit.

#include <iostream>
#include <optional>
#include <string>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "pvmppt/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = pvmppt::cli;

  CLI::App app{"PV module MPPT simulation and micro-inverter sizing toolkit", "pvmppt"};
  app.require_subcommand(1);

  cli::GlobalOptions global;
  app.add_option("--config", global.config_path, "Configuration file (key = value lines)");
  app.add_option("--out", global.out_dir, "Output directory (overrides out.dir)");

  auto* simulate = app.add_subcommand("simulate", "Run the daily closed-loop MPPT simulation");
  std::optional<std::string> variant;
  simulate->add_option("--variant", variant, "PoFixed, PoModulated, IncCond or all");

  auto* size_cap = app.add_subcommand("size-cap", "Size a decoupling capacitor");
  cli::SizeCapOptions cap;
  size_cap->add_option("--power", cap.power, "PV power P_pv in W")->required();
  size_cap->add_option("--freq", cap.freq, "Grid fundamental f0 in Hz")->required();
  size_cap->add_option("--vdc", cap.vdc, "Voltage at the capacitor in V")->required();
  size_cap->add_option("--ripple", cap.ripple, "Permitted ripple dV in V")->required();
  size_cap->add_option("--location", cap.location, "pv_side, dc_link or ac_side")->capture_default_str();

  auto* iv = app.add_subcommand("iv-curve", "Write the I-V / P-V curve for one condition");
  cli::IvCurveOptions iv_opts;
  iv->add_option("--g", iv_opts.g, "Irradiance in W/m^2")->capture_default_str();
  iv->add_option("--t", iv_opts.t, "Cell temperature in degC")->capture_default_str();
  iv->add_option("--points", iv_opts.points, "Number of voltage points")->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Compare decoupling placements from the config");

  auto* inverter = app.add_subcommand("inverter", "Averaged inverter output for a link voltage");
  std::optional<double> v_link;
  inverter->add_option("--v-link", v_link, "DC link voltage in V (default stage.v_link)");

  for (auto* sub : {simulate, size_cap, iv, compare, inverter}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  if (*simulate) return cli::cmd_simulate(global, variant, std::cout, std::cerr);
  if (*size_cap) return cli::cmd_size_cap(cap, std::cout, std::cerr);
  if (*iv) return cli::cmd_iv_curve(global, iv_opts, std::cout, std::cerr);
  if (*compare) return cli::cmd_compare(global, std::cout, std::cerr);
  if (*inverter) return cli::cmd_inverter(global, v_link, std::cout, std::cerr);
  return cli::kExitUsage;
}
