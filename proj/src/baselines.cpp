#include "mbnoma/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace mbnoma {

namespace {

/// Serves the unit groups over one or two alternating slots and folds the
/// duty-weighted rates into one outcome. Units must arrive strongest first.
SchemeOutcome serve_slotted(const std::vector<Unit>& units,
                            const std::vector<UserChannel>& users, const DropConfig& cfg,
                            const std::vector<double>& r_min) {
  SchemeOutcome out;
  out.per_user = RVector::Zero(static_cast<Eigen::Index>(users.size()));

  std::vector<std::vector<Unit>> slots;
  if (static_cast<int>(units.size()) <= cfg.num_rf_chains) {
    slots.push_back(units);
  } else {
    slots.resize(2);
    for (size_t i = 0; i < units.size(); ++i) slots[i % 2].push_back(units[i]);
  }
  const double duty = 1.0 / static_cast<double>(slots.size());

  for (const std::vector<Unit>& slot_units : slots) {
    ServeResult slot = serve_units(slot_units, users, cfg, r_min, cfg.bs_power_mw());
    out.sum_rate += duty * slot.report.sum_rate;
    for (size_t s = 0; s < slot.served_ids.size(); ++s)
      out.per_user(slot.served_ids[s] - 1) +=
          duty * slot.report.per_user(static_cast<Eigen::Index>(s));
    out.qos_dropped = out.qos_dropped || slot.power.qos_dropped;
    out.sic_dropped = out.sic_dropped || slot.power.sic_dropped;
    out.slot_duty.push_back(duty);
    out.slots.push_back(std::move(slot));
  }
  return out;
}

}  // namespace

SchemeOutcome run_oma(const std::vector<UserChannel>& users, const DropConfig& cfg,
                      const std::vector<double>& r_min) {
  std::vector<Unit> units;
  units.reserve(users.size());
  for (const UserChannel& u : users)
    units.push_back({{u.user_id}, {{cfg.m_bs, u.los.aod}}});
  return serve_slotted(units, users, cfg, r_min);
}

double pairing_beamwidth_rad(int m_bs) { return deg_to_rad(102.1 / m_bs); }

SchemeOutcome run_single_beam(const std::vector<UserChannel>& users, const DropConfig& cfg,
                              const std::vector<double>& r_min) {
  const int K = static_cast<int>(users.size());
  const double width = pairing_beamwidth_rad(cfg.m_bs);

  // Greedy pairing, closest departure angles first.
  struct Cand {
    double diff;
    int i, j;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j) {
      const double diff = std::abs(users[i].los.aod - users[j].los.aod);
      if (diff < width) cands.push_back({diff, i, j});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.diff != b.diff) return a.diff < b.diff;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<int> partner(K, -1);
  for (const Cand& c : cands) {
    if (partner[c.i] >= 0 || partner[c.j] >= 0) continue;
    partner[c.i] = c.j;
    partner[c.j] = c.i;
  }

  // Units in strength order: users are already ranked, a pair sits at its
  // stronger member's position and the beam steers at that member.
  std::vector<Unit> units;
  for (int i = 0; i < K; ++i) {
    if (partner[i] >= 0 && partner[i] < i) continue;  // emitted with the stronger member
    Unit u;
    if (partner[i] > i)
      u.user_ids = {users[i].user_id, users[partner[i]].user_id};
    else
      u.user_ids = {users[i].user_id};
    u.subarrays = {{cfg.m_bs, users[i].los.aod}};
    units.push_back(std::move(u));
  }
  return serve_slotted(units, users, cfg, r_min);
}

}  // namespace mbnoma
