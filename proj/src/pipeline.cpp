#include "mbnoma/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "mbnoma/precoding.hpp"

namespace mbnoma {

ServeResult serve_units(const std::vector<Unit>& units, const std::vector<UserChannel>& users,
                        const DropConfig& cfg, const std::vector<double>& r_min,
                        double budget_mw) {
  if (units.empty()) throw std::invalid_argument("serve_units: no units");
  if (r_min.size() != users.size())
    throw std::invalid_argument("serve_units: r_min must cover every user");

  ServeResult out;
  for (const Unit& u : units) {
    if (u.user_ids.empty() || u.user_ids.size() > 2)
      throw std::invalid_argument("serve_units: units carry one or two users");
    for (int id : u.user_ids) out.served_ids.push_back(id);
  }
  std::sort(out.served_ids.begin(), out.served_ids.end());
  if (std::adjacent_find(out.served_ids.begin(), out.served_ids.end()) != out.served_ids.end())
    throw std::invalid_argument("serve_units: units overlap");

  const BeamformerBank bank = build_bank(units, users, cfg.m_bs, cfg.m_ue);
  const CMatrix h_eff = effective_channel(bank, users);  // chains x all users

  const int n_units = static_cast<int>(units.size());
  out.h_hat.resize(n_units, n_units);
  for (int c = 0; c < n_units; ++c) {
    CMatrix cols(n_units, units[c].user_ids.size());
    for (size_t i = 0; i < units[c].user_ids.size(); ++i)
      cols.col(i) = h_eff.col(units[c].user_ids[i] - 1);
    out.h_hat.col(c) = group_equivalent_channel(cols);
  }
  out.precoder = zf_precoder(out.h_hat);

  const int served = static_cast<int>(out.served_ids.size());
  std::vector<int> row_of(users.size() + 1, -1);
  for (int s = 0; s < served; ++s) row_of[out.served_ids[s]] = s;

  out.params.noise_mw = cfg.noise_mw();
  out.params.gain.resize(served, n_units);
  out.params.mask = IMatrix::Zero(served, n_units);
  for (int s = 0; s < served; ++s) {
    const CVector h_k = h_eff.col(out.served_ids[s] - 1);
    for (int c = 0; c < n_units; ++c)
      out.params.gain(s, c) = std::norm(h_k.dot(out.precoder.col(c)));
  }
  for (int c = 0; c < n_units; ++c)
    for (int id : units[c].user_ids) out.params.mask(row_of[id], c) = 1;

  std::vector<double> r_min_sub(served);
  for (int s = 0; s < served; ++s) r_min_sub[s] = r_min[out.served_ids[s] - 1];

  out.power = sca_power_allocation(out.params, r_min_sub, budget_mw);
  out.report = rate_report(out.params, out.power.p);
  return out;
}

SchemeOutcome run_proposed(const std::vector<UserChannel>& users, const DropConfig& cfg,
                           const std::vector<double>& r_min) {
  SchemeOutcome out;
  out.per_user = RVector::Zero(static_cast<Eigen::Index>(users.size()));

  const ConditionalEvaluator ev(users, cfg);
  out.grouping = coalition_formation(ev);
  const std::vector<Unit> units = units_from_partition(out.grouping.partition, users, cfg.m_bs);

  ServeResult slot = serve_units(units, users, cfg, r_min, cfg.bs_power_mw());
  out.sum_rate = slot.report.sum_rate;
  for (size_t s = 0; s < slot.served_ids.size(); ++s)
    out.per_user(slot.served_ids[s] - 1) = slot.report.per_user(static_cast<Eigen::Index>(s));
  out.qos_dropped = slot.power.qos_dropped;
  out.sic_dropped = slot.power.sic_dropped;
  out.slot_duty = {1.0};
  out.slots.push_back(std::move(slot));
  return out;
}

}  // namespace mbnoma
