#pragma once

#include <vector>

#include "mbnoma/beamforming.hpp"
#include "mbnoma/channel.hpp"
#include "mbnoma/grouping.hpp"
#include "mbnoma/power.hpp"

namespace mbnoma {

/// Digital stage outcome for one simultaneous transmission: the served user
/// ids, the gains/mask handed to the power stage, the allocation and the
/// rates it achieves, plus the precoding matrices for diagnostics.
struct ServeResult {
  std::vector<int> served_ids;  // ascending global user ids
  RateParams params;
  PowerResult power;
  RateReport report;
  CMatrix h_hat;     // chains x units equivalent channels
  CMatrix precoder;  // unit-column zero-forcing matrix
};

/// Runs one slot: analog bank for the units, per-unit equivalent channels,
/// zero-forcing, then the successive-convex power allocation with the given
/// budget. Units must cover disjoint users; every unit becomes one RF chain.
/// Throws IllConditionedError when zero-forcing is untrustworthy.
ServeResult serve_units(const std::vector<Unit>& units, const std::vector<UserChannel>& users,
                        const DropConfig& cfg, const std::vector<double>& r_min,
                        double budget_mw);

/// One scheme's result on one drop. sum_rate and per_user are duty weighted
/// across slots; ok flips to false when a slot's precoder was dropped.
struct SchemeOutcome {
  double sum_rate = 0.0;
  RVector per_user;
  bool ok = true;
  bool qos_dropped = false;
  bool sic_dropped = false;
  GroupingResult grouping;          // filled by the proposed scheme
  std::vector<ServeResult> slots;
  std::vector<double> slot_duty;
};

/// Coalition grouping, beam-split analog stage, zero-forcing and power
/// allocation, all users served at once.
SchemeOutcome run_proposed(const std::vector<UserChannel>& users, const DropConfig& cfg,
                           const std::vector<double>& r_min);

}  // namespace mbnoma
