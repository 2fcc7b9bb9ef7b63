#include "mbnoma/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mbnoma {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
  // Accept plain fractions like 1/6 for the cell portion.
  const auto slash = v.find('/');
  try {
    size_t used = 0;
    if (slash != std::string::npos) {
      const double num = std::stod(v.substr(0, slash));
      const double den = std::stod(v.substr(slash + 1));
      if (den == 0.0) throw std::invalid_argument("zero denominator");
      return num / den;
    }
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": cannot parse number '" + v + "'");
  }
}

int parse_int(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const long d = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": cannot parse integer '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(where + ": cannot parse boolean '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ParsedConfig preset_defaults(const std::string& preset) {
  ParsedConfig cfg;
  cfg.experiment.preset = preset;
  if (preset == "sumrate_vs_power") {
    // base DropConfig already matches: K=7, N_RF=4, 100 antennas, 30 dBm
  } else if (preset == "sumrate_vs_antennas") {
    // sweep overrides m_bs per point
  } else if (preset == "sumrate_vs_density") {
    cfg.drop.num_users = 12;
    cfg.drop.num_rf_chains = 8;
  } else if (preset == "convergence") {
    cfg.drop.num_users = 5;
    cfg.drop.num_rf_chains = 3;
    cfg.experiment.drops = 100;
  } else {
    throw std::invalid_argument("unknown preset '" + preset + "'");
  }
  return cfg;
}

std::vector<double> default_sweep(const std::string& preset) {
  if (preset == "sumrate_vs_power") return {20.0, 25.0, 30.0, 35.0, 40.0, 46.0};
  if (preset == "sumrate_vs_antennas") return {50.0, 100.0, 150.0, 200.0};
  if (preset == "sumrate_vs_density") return {1.0, 0.5, 0.25, 1.0 / 6.0};
  if (preset == "convergence") return {};
  throw std::invalid_argument("unknown preset '" + preset + "'");
}

std::vector<std::string> default_schemes(const std::string& preset) {
  if (preset == "convergence") return {"proposed", "exhaustive"};
  return {"proposed", "single_beam", "oma"};
}

DropConfig apply_sweep_value(const DropConfig& base, const std::string& preset, double value) {
  DropConfig cfg = base;
  if (preset == "sumrate_vs_power") {
    cfg.bs_power_dbm = value;
  } else if (preset == "sumrate_vs_antennas") {
    cfg.m_bs = static_cast<int>(std::lround(value));
    cfg.m_min = std::max(1, cfg.m_bs / 10);
  } else if (preset == "sumrate_vs_density") {
    cfg.cell_portion = value;
  } else if (preset == "convergence") {
    // no sweep dimension
  } else {
    throw std::invalid_argument("unknown preset '" + preset + "'");
  }
  return cfg;
}

ParsedConfig parse_config_file(const std::string& path, const std::string& preset) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");

  ParsedConfig cfg = preset_defaults(preset);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument(where + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "drop" && section != "pathloss" && section != "experiment")
        throw std::invalid_argument(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (section == "drop") {
      DropConfig& d = cfg.drop;
      if (key == "num_users") d.num_users = parse_int(val, where);
      else if (key == "num_rf_chains") d.num_rf_chains = parse_int(val, where);
      else if (key == "m_bs") d.m_bs = parse_int(val, where);
      else if (key == "m_ue") d.m_ue = parse_int(val, where);
      else if (key == "m_min") d.m_min = parse_int(val, where);
      else if (key == "num_nlos_paths") d.num_nlos_paths = parse_int(val, where);
      else if (key == "cell_radius_m") d.cell_radius_m = parse_double(val, where);
      else if (key == "d_min_m") d.d_min_m = parse_double(val, where);
      else if (key == "cell_portion") d.cell_portion = parse_double(val, where);
      else if (key == "bs_power_dbm") d.bs_power_dbm = parse_double(val, where);
      else if (key == "noise_power_dbm") d.noise_power_dbm = parse_double(val, where);
      else if (key == "r_min_low") d.r_min_low = parse_double(val, where);
      else if (key == "r_min_high") d.r_min_high = parse_double(val, where);
      else if (key == "max_sweeps_factor") d.max_sweeps_factor = parse_int(val, where);
      else throw std::invalid_argument(where + ": unknown key '" + key + "' in [drop]");
    } else if (section == "pathloss") {
      PathLossParams& p = cfg.drop.pathloss;
      if (key == "los_intercept_db") p.los_intercept_db = parse_double(val, where);
      else if (key == "los_slope_db") p.los_slope_db = parse_double(val, where);
      else if (key == "los_shadow_sigma_db") p.los_shadow_sigma_db = parse_double(val, where);
      else if (key == "nlos_intercept_db") p.nlos_intercept_db = parse_double(val, where);
      else if (key == "nlos_slope_db") p.nlos_slope_db = parse_double(val, where);
      else if (key == "nlos_shadow_sigma_db") p.nlos_shadow_sigma_db = parse_double(val, where);
      else throw std::invalid_argument(where + ": unknown key '" + key + "' in [pathloss]");
    } else if (section == "experiment") {
      ExperimentConfig& e = cfg.experiment;
      if (key == "drops") e.drops = parse_int(val, where);
      else if (key == "seed") e.master_seed = static_cast<std::uint64_t>(
                                  std::stoull(val));
      else if (key == "out") e.out_dir = val;
      else if (key == "trace") e.trace = parse_bool(val, where);
      else if (key == "threads") e.threads = parse_int(val, where);
      else if (key == "schemes") e.schemes = split_list(val);
      else if (key == "sweep") {
        e.sweep.clear();
        for (const std::string& s : split_list(val)) e.sweep.push_back(parse_double(s, where));
      } else {
        throw std::invalid_argument(where + ": unknown key '" + key + "' in [experiment]");
      }
    } else {
      throw std::invalid_argument(where + ": key outside any section");
    }
  }
  return cfg;
}

}  // namespace mbnoma
