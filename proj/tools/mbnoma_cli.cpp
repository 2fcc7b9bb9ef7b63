// Command-line front end: Monte Carlo experiment runner, self-check gates,
// and a beam-pattern exporter.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mbnoma/acceptance.hpp"
#include "mbnoma/beamforming.hpp"
#include "mbnoma/common.hpp"
#include "mbnoma/config.hpp"
#include "mbnoma/montecarlo.hpp"

namespace {

int cmd_run(const std::string& preset, const std::string& config_path, int drops,
            std::uint64_t seed, bool seed_set, const std::string& out_dir,
            const std::vector<std::string>& schemes, const std::vector<double>& sweep,
            bool trace, int threads) {
  mbnoma::ParsedConfig cfg = config_path.empty()
                                 ? mbnoma::preset_defaults(preset)
                                 : mbnoma::parse_config_file(config_path, preset);
  if (drops > 0) cfg.experiment.drops = drops;
  if (seed_set) cfg.experiment.master_seed = seed;
  if (!out_dir.empty()) cfg.experiment.out_dir = out_dir;
  if (!schemes.empty()) cfg.experiment.schemes = schemes;
  if (!sweep.empty()) cfg.experiment.sweep = sweep;
  if (trace) cfg.experiment.trace = true;
  if (threads > 0) cfg.experiment.threads = threads;

  const mbnoma::ExperimentResult res = mbnoma::run_experiment(cfg);
  for (const mbnoma::SchemePoint& row : res.rows)
    std::printf("%-22s %-12s mean %10.4f  +/- %.4f  (drops %d, dropped %d)\n",
                (cfg.experiment.preset + "@" + std::to_string(row.sweep_value)).c_str(),
                row.scheme.c_str(), row.mean_sum_rate, row.std_error, row.drops,
                row.dropped_samples);
  for (const std::string& f : res.files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

int cmd_oracle(const std::string& which, const std::string& out_dir) {
  std::vector<int> ids;
  if (which == "all")
    ids = mbnoma::all_gate_ids();
  else
    ids.push_back(mbnoma::gate_id_from_name(which));

  bool all_ok = true;
  for (const mbnoma::GateResult& r : mbnoma::run_gates(ids, out_dir)) {
    std::printf("[%s] %d %-12s %s  (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str(), r.seconds);
    all_ok = all_ok && r.passed;
  }
  return all_ok ? 0 : 1;
}

int cmd_pattern(const std::string& out_path, const std::vector<int>& sizes,
                const std::vector<double>& steers_deg, int m_bs, double step_deg) {
  if (sizes.size() != steers_deg.size())
    throw CLI::ValidationError("pattern", "--sizes and --steers need equal lengths");
  std::vector<mbnoma::Subarray> subs;
  for (size_t i = 0; i < sizes.size(); ++i)
    subs.push_back({sizes[i], mbnoma::deg_to_rad(steers_deg[i])});
  const mbnoma::CVector w = mbnoma::rf_chain_beamformer(subs, m_bs);

  const int n = static_cast<int>(180.0 / step_deg) - 1;
  mbnoma::RVector angles(n);
  for (int i = 0; i < n; ++i) angles(i) = mbnoma::deg_to_rad(step_deg * (1 + i));
  mbnoma::write_pattern_csv(out_path, angles, mbnoma::beam_pattern(w, angles));
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-beam NOMA downlink simulator"};
  app.require_subcommand(1);

  // run
  std::string preset = "sumrate_vs_power";
  std::string config_path, out_dir;
  int drops = 0, threads = 0;
  std::uint64_t seed = 0;
  bool trace = false;
  std::vector<std::string> schemes;
  std::vector<double> sweep;
  CLI::App* run = app.add_subcommand("run", "Run a Monte Carlo experiment preset");
  run->add_option("preset", preset,
                  "sumrate_vs_power | sumrate_vs_antennas | sumrate_vs_density | convergence");
  run->add_option("--config", config_path, "INI file overriding the preset defaults");
  run->add_option("--drops", drops, "Monte Carlo drops per sweep point");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "master seed");
  run->add_option("--out", out_dir, "output directory for CSV files");
  run->add_option("--schemes", schemes, "subset of proposed,single_beam,oma")->delimiter(',');
  run->add_option("--sweep", sweep, "override sweep grid values")->delimiter(',');
  run->add_flag("--trace", trace, "also write raw per-drop and grouping-trace CSVs");
  run->add_option("--threads", threads, "worker threads (default: hardware)");

  // oracle
  std::string gate = "all";
  std::string oracle_out = "acceptance_out";
  CLI::App* oracle = app.add_subcommand("oracle", "Run the self-check gates");
  oracle->add_option("gate", gate,
                     "all | grouping | convergence | power | gradient | zf | beamsplit | "
                     "trends | determinism | 1..8");
  oracle->add_option("--out", oracle_out, "artifact directory");

  // pattern
  std::string pattern_out = "pattern.csv";
  std::vector<int> sizes = {78, 50};
  std::vector<double> steers = {90.0, 70.0};
  int pattern_m_bs = 128;
  double step = 0.25;
  CLI::App* pattern = app.add_subcommand("pattern", "Export a split-beam gain pattern");
  pattern->add_option("--out", pattern_out, "CSV path");
  pattern->add_option("--sizes", sizes, "subarray element counts")->delimiter(',');
  pattern->add_option("--steers", steers, "subarray steering angles, degrees")->delimiter(',');
  pattern->add_option("--mbs", pattern_m_bs, "total BS antennas (zero-pads the rest)");
  pattern->add_option("--step", step, "angle grid step in degrees");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(preset, config_path, drops, seed, seed_opt->count() > 0, out_dir, schemes,
                     sweep, trace, threads);
    if (oracle->parsed()) return cmd_oracle(gate, oracle_out);
    if (pattern->parsed()) return cmd_pattern(pattern_out, sizes, steers, pattern_m_bs, step);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
