#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbnoma/beamforming.hpp"
#include "mbnoma/channel.hpp"
#include "mbnoma/common.hpp"

namespace mbnoma {

/// One coalition: members ascending by global user id (ids are LOS-strength
/// ranks, so members[0] is the stronger user of a pair), with the parallel
/// antenna allocation. Sizes 1 and 2 only; a singleton owns the full array.
struct Coalition {
  std::vector<int> members;
  std::vector<int> antennas;
};

/// Coalition structure over a drop: disjoint cover of the user ids.
struct Partition {
  std::vector<Coalition> coalitions;

  int size() const { return static_cast<int>(coalitions.size()); }
  int find_coalition_of(int user_id) const;  // index, or -1
  /// Throws std::invalid_argument on a malformed structure (coverage, member
  /// order, sizes, antenna ranges or sums).
  void validate(int num_users, int m_bs, int m_min) const;
};

/// Evaluates the grouping-stage conditional sum rate (identity digital
/// precoder, equal power p_bs/K) in O(1) per (user, coalition) pair via
/// per-steering-angle prefix sums of v_u^H H_u.
class ConditionalEvaluator {
 public:
  ConditionalEvaluator(const std::vector<UserChannel>& users, const DropConfig& cfg);

  /// Effective scalar channel of user (1-based id) through a coalition's
  /// beam-split analog beamformer.
  Complex effective(int user_id, const Coalition& c) const;

  /// Conditional rate of one user inside partition p; zero when the user is
  /// not in coalition coalition_idx.
  double conditional_rate(const Partition& p, int user_id, int coalition_idx) const;

  /// Payoff-weighted total: plain sum of conditional rates when the structure
  /// fits the RF chains, scaled by num_rf_chains/|B| when it does not.
  double sum_rate(const Partition& p) const;

  int num_users() const { return static_cast<int>(cos_aod_.size()); }
  int num_rf_chains() const { return n_rf_; }
  int m_bs() const { return m_bs_; }
  int m_min() const { return m_min_; }
  int max_sweeps() const { return max_sweeps_; }

 private:
  int m_bs_ = 0;
  int n_rf_ = 0;
  int m_min_ = 0;
  int max_sweeps_ = 0;
  double power_each_mw_ = 0.0;
  double noise_mw_ = 0.0;
  std::vector<double> cos_aod_;              // per user id-1
  std::vector<std::vector<CVector>> prefix_;  // [user][angle] length m_bs+1
};

/// Re-optimizes the antenna split of the pair at coalition_idx by scanning
/// m in [m_min, m_bs - m_min] for the first member (second gets the rest),
/// ties toward the smaller first-member count. Returns the best total.
double best_pair_split(const ConditionalEvaluator& ev, Partition& p, int coalition_idx);

struct OpResult {
  Partition partition;
  double sum_rate = 0.0;
};

/// Leave-and-join of user k onto a singleton target coalition, antenna split
/// re-optimized. Returns the candidate only if it strictly beats
/// current_value under the relative tolerance.
std::optional<OpResult> try_leave_join(const ConditionalEvaluator& ev, const Partition& p,
                                       int user_id, int target_idx, double current_value);

/// Switch of user k with a member of a full target coalition; both affected
/// coalitions re-optimize antennas, jointly when both end up as pairs.
std::optional<OpResult> try_switch(const ConditionalEvaluator& ev, const Partition& p,
                                   int user_id, int partner_id, double current_value);

struct TraceRow {
  int op_index = 0;
  std::string type;  // "join", "switch", "merge"
  int user_id = 0;
  int coalitions = 0;
  double sum_rate = 0.0;
};

struct GroupingResult {
  Partition partition;
  double sum_rate = 0.0;
  int accepted_ops = 0;
  int sweeps = 0;
  bool converged = false;
  bool merge_fallback = false;
  std::vector<TraceRow> trace;
};

/// Coalition formation: from all-singletons, each user in id order probes
/// every other coalition (leave-join onto singletons, switch against pair
/// members) and takes the first strictly improving move; repeats until a full
/// sweep accepts nothing. If the final structure still exceeds the RF chains,
/// greedily merges the two singletons costing the least total rate.
GroupingResult coalition_formation(const ConditionalEvaluator& ev);

/// True when no single leave-join or switch strictly improves the total.
bool is_stable(const ConditionalEvaluator& ev, const Partition& p);

/// Number of (structure, antenna-split) candidates the exhaustive search
/// visits for the given scenario size.
double exhaustive_search_count(int num_users, int num_rf_chains, int m_bs, int m_min);

/// Globally optimal partition by joint enumeration of structures and all
/// pair splits. Throws std::runtime_error when the predicted candidate count
/// exceeds eval_cap.
GroupingResult exhaustive_grouping(const ConditionalEvaluator& ev, double eval_cap = 5e6);

/// Beam-split units for the final structure: one unit per coalition, one
/// subarray per member steered at that member's LOS departure angle.
std::vector<Unit> units_from_partition(const Partition& p, const std::vector<UserChannel>& users,
                                       int m_bs);

}  // namespace mbnoma
