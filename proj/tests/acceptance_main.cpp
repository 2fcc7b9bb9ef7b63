// Acceptance suite: one pass/fail line per gate, nonzero exit when any gate
// fails. Tolerances are pinned inside the gate implementations.

#include <cstdio>

#include "mbnoma/acceptance.hpp"

int main() {
  bool all_ok = true;
  for (const mbnoma::GateResult& r :
       mbnoma::run_gates(mbnoma::all_gate_ids(), "acceptance_out")) {
    std::printf("[%s] criterion %d (%s): %s  (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    all_ok = all_ok && r.passed;
  }
  std::printf(all_ok ? "acceptance: all criteria passed\n"
                     : "acceptance: at least one criterion FAILED\n");
  return all_ok ? 0 : 1;
}
