#include "mbnoma/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mbnoma {

namespace {

// Strict improvement threshold for coalition operations.
constexpr double kRelTol = 1e-9;

bool improves(double candidate, double current) {
  return candidate > current + kRelTol * std::max(1.0, std::abs(current));
}

}  // namespace

int Partition::find_coalition_of(int user_id) const {
  for (int c = 0; c < size(); ++c)
    for (int id : coalitions[c].members)
      if (id == user_id) return c;
  return -1;
}

void Partition::validate(int num_users, int m_bs, int m_min) const {
  std::vector<int> seen(num_users + 1, 0);
  for (const Coalition& c : coalitions) {
    if (c.members.empty() || c.members.size() > 2)
      throw std::invalid_argument("Partition: coalition size must be 1 or 2");
    if (c.members.size() != c.antennas.size())
      throw std::invalid_argument("Partition: members/antennas size mismatch");
    if (!std::is_sorted(c.members.begin(), c.members.end()) ||
        (c.members.size() == 2 && c.members[0] == c.members[1]))
      throw std::invalid_argument("Partition: members must be strictly ascending");
    int total = 0;
    for (size_t i = 0; i < c.members.size(); ++i) {
      const int id = c.members[i];
      if (id < 1 || id > num_users) throw std::invalid_argument("Partition: user id out of range");
      ++seen[id];
      const int m = c.antennas[i];
      if (c.members.size() == 1) {
        if (m != m_bs) throw std::invalid_argument("Partition: singleton must own the full array");
      } else if (m < m_min) {
        throw std::invalid_argument("Partition: pair member below the antenna floor");
      }
      total += m;
    }
    if (total > m_bs) throw std::invalid_argument("Partition: coalition exceeds the array");
  }
  for (int id = 1; id <= num_users; ++id)
    if (seen[id] != 1) throw std::invalid_argument("Partition: user coverage is not exactly once");
}

ConditionalEvaluator::ConditionalEvaluator(const std::vector<UserChannel>& users,
                                           const DropConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(users.size()) != cfg.num_users)
    throw std::invalid_argument("ConditionalEvaluator: user list size != num_users");
  m_bs_ = cfg.m_bs;
  n_rf_ = cfg.num_rf_chains;
  m_min_ = cfg.m_min;
  max_sweeps_ = cfg.max_sweeps_factor * cfg.num_users;
  power_each_mw_ = cfg.bs_power_mw() / cfg.num_users;
  noise_mw_ = cfg.noise_mw();

  const int K = cfg.num_users;
  cos_aod_.resize(K);
  for (int k = 0; k < K; ++k) cos_aod_[k] = std::cos(users[k].los.aod);

  // prefix_[u][a](n) = sum_{m<n} (v_u^H H_u)(m) * exp(-j*m*pi*cos(theta_a)),
  // which turns any contiguous-subarray effective channel into two lookups.
  prefix_.assign(K, std::vector<CVector>(K));
  for (int u = 0; u < K; ++u) {
    const Eigen::RowVectorXcd row =
        user_combiner(users[u].los.aoa, cfg.m_ue).adjoint() *
        channel_matrix(users[u], cfg.m_ue, cfg.m_bs);
    for (int a = 0; a < K; ++a) {
      CVector p(m_bs_ + 1);
      p(0) = Complex(0.0, 0.0);
      const double step = kPi * cos_aod_[a];
      for (int m = 0; m < m_bs_; ++m) p(m + 1) = p(m) + row(m) * std::polar(1.0, -step * m);
      prefix_[u][a] = std::move(p);
    }
  }
}

Complex ConditionalEvaluator::effective(int user_id, const Coalition& c) const {
  const int u = user_id - 1;
  Complex sum(0.0, 0.0);
  int pos = 0;
  double offset = 0.0;
  for (size_t i = 0; i < c.members.size(); ++i) {
    const int a = c.members[i] - 1;
    const int m = c.antennas[i];
    const double step = kPi * cos_aod_[a];
    const Complex seg = prefix_[u][a](pos + m) - prefix_[u][a](pos);
    sum += std::polar(1.0, -offset + step * pos) * seg;
    offset += m * step;
    pos += m;
  }
  return sum / std::sqrt(static_cast<double>(m_bs_));
}

double ConditionalEvaluator::conditional_rate(const Partition& p, int user_id,
                                              int coalition_idx) const {
  const Coalition& own = p.coalitions[coalition_idx];
  bool inside = false;
  int stronger_in_group = 0;
  for (int id : own.members) {
    if (id == user_id) inside = true;
    if (id < user_id) ++stronger_in_group;
  }
  if (!inside) return 0.0;

  const double own_gain = std::norm(effective(user_id, own));
  double interference = own_gain * power_each_mw_ * stronger_in_group;
  for (int c = 0; c < p.size(); ++c) {
    if (c == coalition_idx) continue;
    const Coalition& other = p.coalitions[c];
    interference += std::norm(effective(user_id, other)) * power_each_mw_ *
                    static_cast<double>(other.members.size());
  }
  return std::log2(1.0 + own_gain * power_each_mw_ / (interference + noise_mw_));
}

double ConditionalEvaluator::sum_rate(const Partition& p) const {
  const int K = num_users();
  const int B = p.size();
  // All effective channels once; every user's interference reuses them.
  RMatrix gain(K, B);
  for (int c = 0; c < B; ++c)
    for (int u = 0; u < K; ++u) gain(u, c) = std::norm(effective(u + 1, p.coalitions[c]));

  double total = 0.0;
  for (int c = 0; c < B; ++c) {
    const Coalition& coal = p.coalitions[c];
    for (size_t i = 0; i < coal.members.size(); ++i) {
      const int u = coal.members[i] - 1;
      double interference = gain(u, c) * power_each_mw_ * static_cast<double>(i);
      for (int c2 = 0; c2 < B; ++c2) {
        if (c2 == c) continue;
        interference += gain(u, c2) * power_each_mw_ *
                        static_cast<double>(p.coalitions[c2].members.size());
      }
      total += std::log2(1.0 + gain(u, c) * power_each_mw_ / (interference + noise_mw_));
    }
  }
  const double factor = B > n_rf_ ? static_cast<double>(n_rf_) / B : 1.0;
  return factor * total;
}

double best_pair_split(const ConditionalEvaluator& ev, Partition& p, int coalition_idx) {
  Coalition& c = p.coalitions[coalition_idx];
  if (c.members.size() != 2)
    throw std::invalid_argument("best_pair_split: coalition is not a pair");
  const int m_bs = ev.m_bs();
  const int m_min = ev.m_min();
  double best = -1.0;
  int best_m = m_min;
  for (int m = m_min; m <= m_bs - m_min; ++m) {
    c.antennas = {m, m_bs - m};
    const double val = ev.sum_rate(p);
    if (val > best) {  // strict keeps the smallest m on ties
      best = val;
      best_m = m;
    }
  }
  c.antennas = {best_m, m_bs - best_m};
  return best;
}

namespace {

// Removes user_id from its coalition; a left-behind partner becomes a
// full-array singleton, an emptied coalition disappears.
void detach_user(Partition& p, int user_id) {
  const int src = p.find_coalition_of(user_id);
  Coalition& c = p.coalitions[src];
  if (c.members.size() == 1) {
    p.coalitions.erase(p.coalitions.begin() + src);
    return;
  }
  const int keep = c.members[0] == user_id ? c.members[1] : c.members[0];
  c.members = {keep};
  c.antennas = {0};  // placeholder, fixed below
}

void make_singleton(Coalition& c, int m_bs) { c.antennas = {m_bs}; }

void insert_member(Coalition& c, int user_id) {
  c.members.push_back(user_id);
  std::sort(c.members.begin(), c.members.end());
  c.antennas.assign(c.members.size(), 0);
}

}  // namespace

std::optional<OpResult> try_leave_join(const ConditionalEvaluator& ev, const Partition& p,
                                       int user_id, int target_idx, double current_value) {
  const int src = p.find_coalition_of(user_id);
  if (src < 0 || src == target_idx) return std::nullopt;
  if (p.coalitions[target_idx].members.size() != 1) return std::nullopt;

  Partition cand = p;
  const int target_user = cand.coalitions[target_idx].members[0];
  detach_user(cand, user_id);
  for (Coalition& c : cand.coalitions)
    if (c.members.size() == 1) make_singleton(c, ev.m_bs());
  const int tgt = cand.find_coalition_of(target_user);
  insert_member(cand.coalitions[tgt], user_id);
  const double val = best_pair_split(ev, cand, tgt);
  if (!improves(val, current_value)) return std::nullopt;
  return OpResult{std::move(cand), val};
}

std::optional<OpResult> try_switch(const ConditionalEvaluator& ev, const Partition& p,
                                   int user_id, int partner_id, double current_value) {
  if (user_id == partner_id) return std::nullopt;
  const int src = p.find_coalition_of(user_id);
  const int tgt = p.find_coalition_of(partner_id);
  if (src < 0 || tgt < 0 || src == tgt) return std::nullopt;

  Partition cand = p;
  auto swap_in = [](Coalition& c, int out_id, int in_id) {
    for (int& id : c.members)
      if (id == out_id) id = in_id;
    std::sort(c.members.begin(), c.members.end());
  };
  swap_in(cand.coalitions[src], user_id, partner_id);
  swap_in(cand.coalitions[tgt], partner_id, user_id);

  std::vector<int> pairs;
  for (int idx : {src, tgt}) {
    Coalition& c = cand.coalitions[idx];
    if (c.members.size() == 1)
      make_singleton(c, ev.m_bs());
    else
      pairs.push_back(idx);
  }

  double val = 0.0;
  if (pairs.empty()) {
    val = ev.sum_rate(cand);
  } else if (pairs.size() == 1) {
    val = best_pair_split(ev, cand, pairs[0]);
  } else {
    // Both coalitions stay pairs: their splits interact through the
    // interference each beamformer radiates at the other's members, so the
    // maximization scans both ranges jointly.
    const int m_bs = ev.m_bs();
    const int m_min = ev.m_min();
    double best = -1.0;
    int best_a = m_min, best_b = m_min;
    Coalition& ca = cand.coalitions[pairs[0]];
    Coalition& cb = cand.coalitions[pairs[1]];
    for (int ma = m_min; ma <= m_bs - m_min; ++ma) {
      ca.antennas = {ma, m_bs - ma};
      for (int mb = m_min; mb <= m_bs - m_min; ++mb) {
        cb.antennas = {mb, m_bs - mb};
        const double v = ev.sum_rate(cand);
        if (v > best) {
          best = v;
          best_a = ma;
          best_b = mb;
        }
      }
    }
    ca.antennas = {best_a, m_bs - best_a};
    cb.antennas = {best_b, m_bs - best_b};
    val = best;
  }
  if (!improves(val, current_value)) return std::nullopt;
  return OpResult{std::move(cand), val};
}

GroupingResult coalition_formation(const ConditionalEvaluator& ev) {
  const int K = ev.num_users();
  GroupingResult res;
  for (int id = 1; id <= K; ++id) res.partition.coalitions.push_back({{id}, {ev.m_bs()}});
  res.sum_rate = ev.sum_rate(res.partition);
  res.trace.push_back({0, "init", 0, res.partition.size(), res.sum_rate});

  const int max_sweeps = ev.max_sweeps();
  for (int sweep = 1; sweep <= max_sweeps && !res.converged; ++sweep) {
    res.sweeps = sweep;
    bool accepted_any = false;
    for (int user_id = 1; user_id <= K; ++user_id) {
      const int src = res.partition.find_coalition_of(user_id);
      std::optional<OpResult> accepted;
      std::string op_type;
      for (int t = 0; t < res.partition.size() && !accepted; ++t) {
        if (t == src) continue;
        const Coalition& target = res.partition.coalitions[t];
        if (target.members.size() == 1) {
          if (auto r = try_leave_join(ev, res.partition, user_id, t, res.sum_rate)) {
            accepted = std::move(r);
            op_type = "join";
          }
        } else {
          // Probe both occupants, keep the better improving swap.
          std::optional<OpResult> best;
          for (int partner : target.members) {
            auto r = try_switch(ev, res.partition, user_id, partner, res.sum_rate);
            if (r && (!best || r->sum_rate > best->sum_rate)) best = std::move(r);
          }
          if (best) {
            accepted = std::move(best);
            op_type = "switch";
          }
        }
      }
      if (accepted) {
        res.partition = std::move(accepted->partition);
        res.sum_rate = accepted->sum_rate;
        ++res.accepted_ops;
        accepted_any = true;
        res.trace.push_back(
            {res.accepted_ops, op_type, user_id, res.partition.size(), res.sum_rate});
      }
    }
    if (!accepted_any) res.converged = true;
  }

  // The stable structure can still exceed the RF chains; fold the cheapest
  // singleton pairs together until it fits.
  while (res.partition.size() > ev.num_rf_chains()) {
    res.merge_fallback = true;
    std::vector<int> singles;
    for (int c = 0; c < res.partition.size(); ++c)
      if (res.partition.coalitions[c].members.size() == 1) singles.push_back(c);
    double best_val = -1.0;
    Partition best_partition;
    for (size_t i = 0; i < singles.size(); ++i) {
      for (size_t j = i + 1; j < singles.size(); ++j) {
        Partition cand = res.partition;
        const int uj = cand.coalitions[singles[j]].members[0];
        cand.coalitions.erase(cand.coalitions.begin() + singles[j]);
        const int tgt = singles[i];  // erase happened at the larger index
        insert_member(cand.coalitions[tgt], uj);
        const double val = best_pair_split(ev, cand, tgt);
        if (val > best_val) {
          best_val = val;
          best_partition = std::move(cand);
        }
      }
    }
    res.partition = std::move(best_partition);
    res.sum_rate = best_val;
    res.trace.push_back(
        {static_cast<int>(res.trace.size()), "merge", 0, res.partition.size(), res.sum_rate});
  }
  return res;
}

bool is_stable(const ConditionalEvaluator& ev, const Partition& p) {
  const double current = ev.sum_rate(p);
  for (int user_id = 1; user_id <= ev.num_users(); ++user_id) {
    const int src = p.find_coalition_of(user_id);
    for (int t = 0; t < p.size(); ++t) {
      if (t == src) continue;
      if (p.coalitions[t].members.size() == 1) {
        if (try_leave_join(ev, p, user_id, t, current)) return false;
      } else {
        for (int partner : p.coalitions[t].members)
          if (try_switch(ev, p, user_id, partner, current)) return false;
      }
    }
  }
  return true;
}

double exhaustive_search_count(int num_users, int num_rf_chains, int m_bs, int m_min) {
  const int splits = m_bs - 2 * m_min + 1;
  auto binom = [](int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
  };
  double total = 0.0;
  const int q_min = std::max(0, num_users - num_rf_chains);
  for (int q = q_min; 2 * q <= num_users; ++q) {
    double matchings = 1.0;
    for (int r = 1; r <= q; ++r) matchings *= 2.0 * r - 1.0;
    total += binom(num_users, 2 * q) * matchings * std::pow(static_cast<double>(splits), q);
  }
  return total;
}

namespace {

struct ExhaustiveState {
  const ConditionalEvaluator* ev = nullptr;
  Partition current;
  std::vector<int> pair_idx;
  double best_val = -1.0;
  Partition best_partition;

  void eval_splits(size_t which) {
    if (which == pair_idx.size()) {
      const double v = ev->sum_rate(current);
      if (v > best_val) {
        best_val = v;
        best_partition = current;
      }
      return;
    }
    Coalition& c = current.coalitions[pair_idx[which]];
    const int m_bs = ev->m_bs();
    const int m_min = ev->m_min();
    for (int m = m_min; m <= m_bs - m_min; ++m) {
      c.antennas = {m, m_bs - m};
      eval_splits(which + 1);
    }
  }

  void build(std::vector<int>& unassigned) {
    if (unassigned.empty()) {
      pair_idx.clear();
      for (int c = 0; c < current.size(); ++c)
        if (current.coalitions[c].members.size() == 2) pair_idx.push_back(c);
      eval_splits(0);
      return;
    }
    const int rem = static_cast<int>(unassigned.size());
    const int u = unassigned.front();
    // Any completion adds at least ceil(rem/2) more coalitions.
    if (current.size() + 1 + (rem - 1 + 1) / 2 <= ev->num_rf_chains()) {
      std::vector<int> rest(unassigned.begin() + 1, unassigned.end());
      current.coalitions.push_back({{u}, {ev->m_bs()}});
      build(rest);
      current.coalitions.pop_back();
    }
    for (int i = 1; i < rem; ++i) {
      if (current.size() + 1 + (rem - 2 + 1) / 2 > ev->num_rf_chains()) break;
      std::vector<int> rest;
      for (int j = 1; j < rem; ++j)
        if (j != i) rest.push_back(unassigned[j]);
      current.coalitions.push_back({{u, unassigned[i]}, {0, 0}});
      build(rest);
      current.coalitions.pop_back();
    }
  }
};

}  // namespace

GroupingResult exhaustive_grouping(const ConditionalEvaluator& ev, double eval_cap) {
  const double predicted =
      exhaustive_search_count(ev.num_users(), ev.num_rf_chains(), ev.m_bs(), ev.m_min());
  if (predicted > eval_cap)
    throw std::runtime_error("exhaustive_grouping: predicted " + std::to_string(predicted) +
                             " candidates exceeds cap " + std::to_string(eval_cap));
  ExhaustiveState st;
  st.ev = &ev;
  std::vector<int> ids(ev.num_users());
  for (int k = 0; k < ev.num_users(); ++k) ids[k] = k + 1;
  st.build(ids);
  if (st.best_val < 0.0)
    throw std::runtime_error("exhaustive_grouping: no feasible structure");
  GroupingResult res;
  res.partition = std::move(st.best_partition);
  res.sum_rate = st.best_val;
  res.converged = true;
  return res;
}

std::vector<Unit> units_from_partition(const Partition& p, const std::vector<UserChannel>& users,
                                       int m_bs) {
  std::vector<Unit> units;
  units.reserve(p.coalitions.size());
  for (const Coalition& c : p.coalitions) {
    Unit u;
    u.user_ids = c.members;
    if (c.members.size() == 1) {
      u.subarrays = {{m_bs, users[c.members[0] - 1].los.aod}};
    } else {
      for (size_t i = 0; i < c.members.size(); ++i)
        u.subarrays.push_back({c.antennas[i], users[c.members[i] - 1].los.aod});
    }
    units.push_back(std::move(u));
  }
  return units;
}

}  // namespace mbnoma
