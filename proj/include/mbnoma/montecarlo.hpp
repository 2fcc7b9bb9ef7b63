#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mbnoma/config.hpp"
#include "mbnoma/pipeline.hpp"

namespace mbnoma {

/// One scheme's outcome on one drop, reduced to what aggregation needs.
struct DropRecord {
  double sum_rate = 0.0;
  bool ok = false;            // false when the precoder was dropped
  bool qos_dropped = false;
  bool sic_dropped = false;
  std::vector<double> grouping_trace;  // conditional sum rate per accepted op
  std::vector<TraceRow> grouping_rows;
  double exhaustive_value = 0.0;       // filled only when requested
};

/// Dispatches one scheme by name: proposed, single_beam, oma.
SchemeOutcome run_scheme(const std::string& scheme, const std::vector<UserChannel>& users,
                         const DropConfig& cfg, const std::vector<double>& r_min);

/// Runs the named schemes on one seeded drop (shared channel realization and
/// rate floors). with_exhaustive additionally solves the grouping stage
/// exactly and stores its value in every record.
std::vector<DropRecord> run_drop(const DropConfig& cfg, const std::vector<std::string>& schemes,
                                 std::uint64_t seed, bool with_exhaustive = false);

struct SchemePoint {
  std::string scheme;
  double sweep_value = 0.0;
  double mean_sum_rate = 0.0;
  double std_error = 0.0;
  double infeasible_qos_fraction = 0.0;
  int drops = 0;       // drops entering the mean
  int dropped_samples = 0;  // ill-conditioned precoder exclusions
};

struct ExperimentResult {
  std::vector<SchemePoint> rows;
  std::vector<std::string> files;  // CSVs written, main table first
};

/// Sweeps the preset grid, drops in parallel but aggregation in a fixed
/// order, and writes <out>/<preset>.csv (plus raw and grouping-trace CSVs
/// when tracing). Reruns with the same seed produce byte-identical files.
ExperimentResult run_experiment(const ParsedConfig& cfg);

/// Deterministic total independent of summation threads.
double pairwise_sum(const std::vector<double>& v);

/// Simple index-sharded parallel loop; rethrows the first worker exception.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace mbnoma
