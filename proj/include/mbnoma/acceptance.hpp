#pragma once

#include <string>
#include <vector>

namespace mbnoma {

struct GateResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Gate ids and names:
///   1 grouping     coalition formation vs exhaustive search gap
///   2 convergence  accepted-operation budget and monotone trace
///   3 power        two-user allocation vs dense grid, constraint residuals
///   4 gradient     closed-form gradient vs central finite differences
///   5 zf           zero-forcing leakage and column norms
///   6 beamsplit    split-beam pattern peaks and steered gains
///   7 trends       Monte Carlo sweep monotonicity and scheme ordering
///   8 determinism  byte-identical reruns
std::vector<int> all_gate_ids();
int gate_id_from_name(const std::string& name);
std::string gate_name(int id);

/// Runs one gate. Failed checks and escaped exceptions both land in the
/// result rather than throwing. out_dir holds any CSV artifacts.
GateResult run_gate(int id, const std::string& out_dir = "acceptance_out");

std::vector<GateResult> run_gates(const std::vector<int>& ids,
                                  const std::string& out_dir = "acceptance_out");

}  // namespace mbnoma
