#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbnoma/channel.hpp"

namespace mbnoma {

struct ExperimentConfig {
  std::string preset = "sumrate_vs_power";
  int drops = 200;
  std::vector<double> sweep;         // empty means the preset default grid
  std::vector<std::string> schemes;  // empty means the preset default set
  std::string out_dir = ".";
  bool trace = false;
  int threads = 0;  // 0 picks hardware concurrency
  std::uint64_t master_seed = 1;
};

struct ParsedConfig {
  DropConfig drop;
  ExperimentConfig experiment;
};

/// Known preset names: sumrate_vs_power, sumrate_vs_antennas,
/// sumrate_vs_density, convergence. Throws on anything else.
ParsedConfig preset_defaults(const std::string& preset);

/// Flat INI: [drop], [pathloss], [experiment] sections, key = value lines,
/// '#'/';' comments. Unknown sections or keys throw with the line number, as
/// do malformed values. Fields absent from the file keep the preset default.
ParsedConfig parse_config_file(const std::string& path, const std::string& preset);

/// Applies one sweep value to a drop configuration according to the preset
/// (transmit power dBm, BS antennas with the proportional floor, or cell
/// portion). The convergence preset has no sweep dimension.
DropConfig apply_sweep_value(const DropConfig& base, const std::string& preset, double value);

std::vector<double> default_sweep(const std::string& preset);
std::vector<std::string> default_schemes(const std::string& preset);

}  // namespace mbnoma
