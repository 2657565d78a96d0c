#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoimec/harness.hpp"

// aoimec <mode> --config <path> [--set key=value]... [--output <dir>] [--seed <u64>]
//
// Modes:
//   aoi       analytic average AoI, closed form and SHS engine side by side
//   simulate  discrete-event estimate (single device, or symmetric population)
//   mfe       mean-field equilibrium via damped fixed-point iteration
//   nash      best-response dynamics, or the MFE exploitability ladder
//   sweep     one CSV row per value of a swept config parameter

int main(int argc, char** argv) {
  CLI::App app{"Average-AoI analysis and mean-field equilibria for edge task offloading"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::optional<std::uint64_t> seed;

  aoimec::cli::RunMode mode = aoimec::cli::RunMode::aoi;
  for (const char* name : {"aoi", "simulate", "mfe", "nash", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--set", overrides, "override a config entry, e.g. --set env.rho=0.5");
    sub->add_option("--output", output_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "simulation master seed (overrides config)");
    sub->callback([&mode, name] { mode = aoimec::cli::mode_from_string(name); });
  }

  CLI11_PARSE(app, argc, argv);
  return aoimec::cli::run(config_path, overrides, output_dir, seed, mode);
}
